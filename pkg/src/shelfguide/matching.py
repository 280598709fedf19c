"""Target-product scoring: embedding cosine similarity fused with banded
CIELAB histogram similarity.

A candidate crop is scored against a reference in two stages.  The cheap
embedding gate runs first; crops whose cosine similarity falls below the
gate are dropped without touching the color stage.  Survivors get a
Bhattacharyya score per horizontal band (top/middle/bottom), the bands
are combined with fixed weights, and the color score is fused with the
embedding score into the final match score.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import color

Embedder = Callable[[np.ndarray], np.ndarray]

_REF_CACHE_MAGIC = b"SHELFREF1\n"


class ShapeMismatch(ValueError):
    """Histogram operands have different bin layouts."""


class DimensionMismatch(ValueError):
    """Embedding operands have different dimensions."""


@dataclass(frozen=True)
class MatchConfig:
    """Weights and thresholds for score fusion.

    Defaults: band weights (0.3, 0.4, 0.3) favoring the middle band,
    fusion weight alpha = 0.70 on the embedding score, and an embedding
    gate of 0.50 below which crops are skipped entirely.
    """

    w_top: float = 0.3
    w_mid: float = 0.4
    w_bot: float = 0.3
    alpha: float = 0.70
    embed_gate: float = 0.50

    def __post_init__(self):
        total = self.w_top + self.w_mid + self.w_bot
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"band weights must sum to 1, got {total}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    @property
    def weights(self) -> tuple[float, float, float]:
        return (self.w_top, self.w_mid, self.w_bot)


@dataclass(frozen=True)
class BandHistogramSet:
    """Unit-sum joint histograms for the top/middle/bottom bands of a crop."""

    top: np.ndarray
    middle: np.ndarray
    bottom: np.ndarray
    pixel_counts: tuple[int, int, int]

    @property
    def bands(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (self.top, self.middle, self.bottom)


@dataclass(frozen=True)
class MatchScore:
    s_embed: float
    s_band: tuple[float, float, float]
    s_color: float
    s_final: float


@dataclass(frozen=True)
class ReferenceSet:
    """Precomputed descriptors for one product: embedding + band histograms."""

    embedding: np.ndarray
    bands: BandHistogramSet


def image_band_histograms(image: np.ndarray) -> BandHistogramSet:
    """Full histogram pipeline for one crop: sRGB -> CIELAB -> 3 bands.

    Crops shorter than 3 rows cannot be banded; they come back as an
    all-empty set, which the color stage scores as 0.
    """
    if image.shape[0] < 3:
        zero = np.zeros(color.HIST_SHAPE)
        return BandHistogramSet(zero, zero.copy(), zero.copy(), (0, 0, 0))
    lab = color.srgb_to_cielab(image)
    parts = color.band_partition(lab)
    hists, counts = zip(*(color.band_histogram(p) for p in parts))
    return BandHistogramSet(hists[0], hists[1], hists[2], tuple(counts))


def bhattacharyya(c: np.ndarray, r: np.ndarray) -> float:
    """Bhattacharyya coefficient sum_i sqrt(c_i * r_i) over histogram bins.

    1 for identical unit-sum distributions, 0 for disjoint support or
    when either histogram is all-zero.
    """
    c = np.asarray(c, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if c.shape != r.shape:
        raise ShapeMismatch(f"histogram shapes differ: {c.shape} vs {r.shape}")
    if not c.any() or not r.any():
        return 0.0
    return float(min(np.sqrt(c * r).sum(), 1.0))


def color_similarity(
    crop_bands: BandHistogramSet,
    ref_bands: BandHistogramSet,
    cfg: MatchConfig = MatchConfig(),
) -> tuple[float, tuple[float, float, float]]:
    """Weighted per-band Bhattacharyya similarity.

    A band that is empty on either side is dropped and the remaining
    weights are renormalized, so occluded regions do not dilute the
    score; with all bands empty the color score is 0.
    """
    scores = []
    active_weights = []
    for crop_h, ref_h, c_count, r_count, weight in zip(
        crop_bands.bands,
        ref_bands.bands,
        crop_bands.pixel_counts,
        ref_bands.pixel_counts,
        cfg.weights,
    ):
        if c_count == 0 or r_count == 0:
            scores.append(0.0)
            active_weights.append(0.0)
        else:
            scores.append(bhattacharyya(crop_h, ref_h))
            active_weights.append(weight)

    total_weight = sum(active_weights)
    if total_weight == 0.0:
        return 0.0, tuple(scores)
    s_color = sum(w * s for w, s in zip(active_weights, scores)) / total_weight
    return s_color, tuple(scores)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"embedding dims differ: {a.shape} vs {b.shape}")
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


def fuse_scores(s_embed: float, s_color: float, cfg: MatchConfig = MatchConfig()) -> float:
    return cfg.alpha * s_embed + (1.0 - cfg.alpha) * s_color


def score_crop(
    crop: np.ndarray,
    reference: ReferenceSet,
    embedder: Embedder,
    cfg: MatchConfig = MatchConfig(),
) -> MatchScore:
    """Full two-stage score of a single crop (no gating)."""
    s_embed = cosine_similarity(embedder(crop), reference.embedding)
    s_color, per_band = color_similarity(image_band_histograms(crop), reference.bands, cfg)
    return MatchScore(s_embed, per_band, s_color, fuse_scores(s_embed, s_color, cfg))


def match_detections(
    crops: Sequence[tuple[int, np.ndarray]],
    reference: ReferenceSet,
    embedder: Embedder,
    cfg: MatchConfig = MatchConfig(),
) -> tuple[int, MatchScore] | None:
    """Pick the best-matching crop, or None when every crop is gated out.

    Crops are `(detection_id, image)` pairs.  The embedding gate is
    applied first; the color stage only runs for survivors.  Ties on the
    final score break toward the lowest detection id, which also makes
    the result independent of crop order.
    """
    best: tuple[float, int, MatchScore] | None = None
    for det_id, crop in crops:
        s_embed = cosine_similarity(embedder(crop), reference.embedding)
        if s_embed < cfg.embed_gate:
            continue
        s_color, per_band = color_similarity(
            image_band_histograms(crop), reference.bands, cfg
        )
        score = MatchScore(s_embed, per_band, s_color, fuse_scores(s_embed, s_color, cfg))
        key = (-score.s_final, det_id)
        if best is None or key < (-best[0], best[1]):
            best = (score.s_final, det_id, score)
    if best is None:
        return None
    return best[1], best[2]


def build_reference(images: Sequence[np.ndarray], embedder: Embedder) -> ReferenceSet:
    """Combine one or more reference images into a ReferenceSet.

    The reference embedding is the renormalized mean of the per-image
    embeddings; band histograms come from the first image.
    """
    if not images:
        raise ValueError("need at least one reference image")
    vectors = np.stack([np.asarray(embedder(img), dtype=np.float64) for img in images])
    mean = vectors.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm == 0.0:
        raise ValueError("reference embeddings cancel out; cannot normalize")
    return ReferenceSet(embedding=mean / norm, bands=image_band_histograms(images[0]))


def save_reference(path: str | Path, barcode: str, reference: ReferenceSet) -> None:
    """Write a versioned reference-set blob (magic header + npz payload)."""
    buf = io.BytesIO()
    np.savez(
        buf,
        embedding=reference.embedding,
        top=reference.bands.top,
        middle=reference.bands.middle,
        bottom=reference.bands.bottom,
        pixel_counts=np.asarray(reference.bands.pixel_counts, dtype=np.int64),
    )
    meta = json.dumps({"barcode": barcode}).encode() + b"\n"
    Path(path).write_bytes(_REF_CACHE_MAGIC + meta + buf.getvalue())


def load_reference(path: str | Path) -> tuple[str, ReferenceSet]:
    """Read a reference-set blob; returns (barcode, ReferenceSet)."""
    raw = Path(path).read_bytes()
    if not raw.startswith(_REF_CACHE_MAGIC):
        raise ValueError(f"{path}: not a reference-set cache file")
    rest = raw[len(_REF_CACHE_MAGIC) :]
    meta_line, _, payload = rest.partition(b"\n")
    meta = json.loads(meta_line)
    arrays = np.load(io.BytesIO(payload))
    bands = BandHistogramSet(
        arrays["top"],
        arrays["middle"],
        arrays["bottom"],
        tuple(int(n) for n in arrays["pixel_counts"]),
    )
    return meta["barcode"], ReferenceSet(embedding=arrays["embedding"], bands=bands)
