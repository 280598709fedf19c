"""Synthetic reference implementations of the perception interfaces.

These stand in for the neural detector / tracker / hand / embedding
backends.  They are deterministic given a seed and read the simulator's
ground truth, so the surrounding cadence, gating and fusion logic can be
tested exactly.
"""

from __future__ import annotations

import numpy as np

from ..catalog import CatalogEntry
from ..matching import Embedder, ReferenceSet, build_reference
from ..perception import (
    Bbox,
    Detection,
    DetectionPrompt,
    HandObservation,
    TrackerLost,
    bbox_iou,
)
from .noise import NoiseModel, ZERO_NOISE, stable_rng, synthetic_detect
from .world import FRAME_HEIGHT, FRAME_WIDTH, ShelfProduct, ShelfSpec, SyntheticFrame

EMBEDDING_DIM = 576
_HAND_BOX_HALF_PX = 12.0


class SyntheticDetector:
    """Detector stand-in driven by frame ground truth plus a noise model.

    Emits product boxes via `synthetic_detect` and a "body part" box for
    the virtual hand, mirroring the open-vocabulary prompt's non-product
    classes.
    """

    def __init__(self, noise: NoiseModel = ZERO_NOISE):
        self.noise = noise

    def detect(self, frame: SyntheticFrame, prompt: DetectionPrompt) -> list[Detection]:
        detections = list(synthetic_detect(frame, self.noise))
        if frame.hand is not None and "body part" in prompt.classes:
            hx, hy = frame.hand
            x0 = max(hx - _HAND_BOX_HALF_PX, 0.0)
            y0 = max(hy - _HAND_BOX_HALF_PX, 0.0)
            x1 = min(hx + _HAND_BOX_HALF_PX, float(FRAME_WIDTH))
            y1 = min(hy + _HAND_BOX_HALF_PX, float(FRAME_HEIGHT))
            if x1 > x0 and y1 > y0:
                detections.append(
                    Detection(
                        id=len(detections),
                        bbox=(x0, y0, x1 - x0, y1 - y0),
                        label="body part",
                        confidence=0.95,
                    )
                )
        return detections


class SyntheticTracker:
    """Reference tracker: follows the ground-truth box that best overlaps
    the previous estimate, with optional seeded jitter."""

    def __init__(self, noise: NoiseModel = ZERO_NOISE, min_iou: float = 0.05):
        self.noise = noise
        self.min_iou = min_iou
        self._bbox: Bbox | None = None

    def start(self, frame: SyntheticFrame, bbox: Bbox) -> None:
        self._bbox = bbox

    def update(self, frame: SyntheticFrame) -> Bbox:
        if self._bbox is None:
            raise TrackerLost("tracker was never started")
        best = None
        best_iou = 0.0
        for truth in frame.visible_truths():
            iou = bbox_iou(self._bbox, truth.bbox)
            if iou > best_iou:
                best_iou = iou
                best = truth
        if best is None or best_iou < self.min_iou:
            self._bbox = None
            raise TrackerLost("estimate no longer overlaps any visible product")
        bbox = best.bbox
        if self.noise.bbox_jitter_px > 0.0:
            rng = stable_rng(self.noise.seed, "tracker", best.barcode, frame.frame_key())
            dx, dy = rng.normal(0.0, self.noise.bbox_jitter_px, size=2)
            bbox = (bbox[0] + dx, bbox[1] + dy, bbox[2], bbox[3])
        self._bbox = bbox
        return bbox


class SyntheticHandProvider:
    """Passes the simulator's virtual fingertip through, clipped to frame."""

    def observe(self, frame: SyntheticFrame) -> HandObservation:
        fingertip = frame.hand
        if fingertip is not None:
            x, y = fingertip
            if not (0 <= x <= FRAME_WIDTH and 0 <= y <= FRAME_HEIGHT):
                fingertip = None
        return HandObservation(fingertip=fingertip, timestamp=frame.frame_idx)


class SyntheticEmbedder:
    """Deterministic appearance embedding for rendered crops.

    Each crop row's mean color votes for the shelf product whose stripe
    it matches (stripe colors are unique shelf-wide); the winning
    identity seeds a reproducible unit vector.  Row voting keeps partial
    and clipped views classifiable, matching how a learned encoder
    degrades gracefully.  Crops matching nothing hash their quantized
    mean color instead, landing far from every reference.  A perturbation
    amplitude > 0 adds seeded noise per call.
    """

    def __init__(
        self,
        shelf: ShelfSpec,
        dim: int = EMBEDDING_DIM,
        perturbation: float = 0.0,
        seed: int = 0,
    ):
        self.dim = dim
        self.perturbation = perturbation
        barcodes = []
        colors = []
        for product in sorted(shelf.products.values(), key=lambda p: p.barcode):
            for stripe in product.stripe_array:
                barcodes.append(product.barcode)
                colors.append(stripe)
        self._stripe_owners = barcodes
        self._stripe_table = np.array(colors)  # (n_products * 3, 3)
        gaps = np.sqrt(
            ((self._stripe_table[:, None, :] - self._stripe_table[None, :, :]) ** 2).sum(-1)
        )
        np.fill_diagonal(gaps, np.inf)
        # Rows farther than half the closest stripe-pair gap stay unclassified.
        self._row_threshold = float(gaps.min()) / 2.0
        self._rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EED]))
        self._cache: dict[str, np.ndarray] = {}

    def __call__(self, image: np.ndarray) -> np.ndarray:
        key = self._classify(np.asarray(image, dtype=np.float64))
        base = self._cache.get(key)
        if base is None:
            base = _unit_vector_for(key, self.dim)
            self._cache[key] = base
        if self.perturbation > 0.0:
            # Scale so `perturbation` is the expected noise norm relative
            # to the unit signal, independent of embedding dimension.
            sigma = self.perturbation / np.sqrt(self.dim)
            noisy = base + sigma * self._rng.standard_normal(self.dim)
            return noisy / np.linalg.norm(noisy)
        return base

    def identity_vector(self, barcode: str) -> np.ndarray:
        """Noise-free embedding for a known product identity."""
        return _unit_vector_for(barcode, self.dim)

    def _classify(self, pixels: np.ndarray) -> str:
        row_colors = pixels.reshape(pixels.shape[0], -1, 3).mean(axis=1)
        dists = np.sqrt(
            ((row_colors[:, None, :] - self._stripe_table[None, :, :]) ** 2).sum(-1)
        )
        nearest = dists.argmin(axis=1)
        in_range = dists[np.arange(len(nearest)), nearest] <= self._row_threshold
        votes: dict[str, int] = {}
        for stripe_idx in nearest[in_range]:
            owner = self._stripe_owners[stripe_idx]
            votes[owner] = votes.get(owner, 0) + 1
        if votes:
            return max(votes.items(), key=lambda kv: (kv[1], kv[0]))[0]
        mean = row_colors.mean(axis=0)
        quantized = tuple((mean // 16).astype(int))
        return f"unknown:{quantized}"


def _unit_vector_for(key: str, dim: int) -> np.ndarray:
    rng = stable_rng("embedding-identity", key, dim)
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def reference_image(product: ShelfProduct, width: int = 96, height: int = 132) -> np.ndarray:
    """Clean frontal reference rendering of one product (three stripes)."""
    img = np.zeros((height, width, 3), dtype=np.uint8)
    base, rem = divmod(height, 3)
    rows = [base + (1 if rem >= 1 else 0), base + (1 if rem >= 2 else 0), base]
    start = 0
    for stripe, nrows in zip(product.stripes, rows):
        img[start : start + nrows] = stripe
        start += nrows
    return img


class RenderedImageSource:
    """Image source that renders shelf products on demand.

    Satisfies the same interface as the fixture and HTTP sources, one
    rendered image per listed ref.
    """

    def __init__(self, shelf: ShelfSpec):
        self.shelf = shelf

    def fetch(self, entry: CatalogEntry) -> list[np.ndarray]:
        try:
            product = self.shelf.product_for(entry.barcode)
        except KeyError:
            return []
        count = max(1, len(entry.image_refs))
        return [reference_image(product) for _ in range(count)]


def build_shelf_references(
    shelf: ShelfSpec, embedder: Embedder
) -> dict[str, ReferenceSet]:
    """Reference descriptors for every product on the shelf."""
    references = {}
    for product in shelf.products.values():
        references[product.barcode] = build_reference(
            [reference_image(product)], embedder
        )
    return references
