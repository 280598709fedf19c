"""Seeded detection noise: misses that grow with range and approach angle,
bbox jitter, and spurious boxes.

Miss draws use one uniform per product (common random numbers), so at a
fixed seed a product missed at an easy pose is also missed at every
harder pose; accuracy is then monotone across the pose grid for every
seed, not just in expectation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from math import exp

import numpy as np

from ..perception import Detection
from .world import FRAME_HEIGHT, FRAME_WIDTH, SyntheticFrame


def stable_u64(*parts) -> int:
    """Deterministic 64-bit seed from arbitrary reprs (hash() is salted)."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "big")


def stable_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(stable_u64(*parts))


def stable_uniform(*parts) -> float:
    return stable_u64(*parts) / 2**64


@dataclass(frozen=True)
class NoiseModel:
    """Detector degradation model; all-zero fields mean a perfect detector.

    miss_rate(area, obliquity) is non-increasing in area and
    non-decreasing in obliquity by construction.
    """

    miss_base: float = 0.0
    miss_area_gain: float = 0.0
    area_ref_px: float = 2500.0
    miss_obliquity_gain: float = 0.0
    bbox_jitter_px: float = 0.0
    spurious_rate: float = 0.0
    embedding_perturbation: float = 0.0
    seed: int = 0

    def miss_rate(self, area_px: float, obliquity_deg: float) -> float:
        p = (
            self.miss_base
            + self.miss_area_gain * exp(-max(area_px, 0.0) / self.area_ref_px)
            + self.miss_obliquity_gain * min(abs(obliquity_deg), 90.0) / 90.0
        )
        return min(max(p, 0.0), 1.0)

    def is_zero(self) -> bool:
        return (
            self.miss_base == 0.0
            and self.miss_area_gain == 0.0
            and self.miss_obliquity_gain == 0.0
            and self.bbox_jitter_px == 0.0
            and self.spurious_rate == 0.0
            and self.embedding_perturbation == 0.0
        )


ZERO_NOISE = NoiseModel()

DEFAULT_NOISE = NoiseModel(
    miss_base=0.02,
    miss_area_gain=0.6,
    area_ref_px=2500.0,
    miss_obliquity_gain=0.3,
    bbox_jitter_px=2.0,
    spurious_rate=0.25,
    embedding_perturbation=0.12,
    seed=0,
)


def synthetic_detect(frame: SyntheticFrame, noise: NoiseModel) -> list[Detection]:
    """Product detections for a frame: ground truth minus seeded misses,
    plus jitter and seeded spurious boxes."""
    detections = []
    det_id = 0
    frame_key = frame.frame_key()

    for truth in frame.visible_truths():
        p_miss = noise.miss_rate(truth.frontal_area_px, truth.obliquity_deg)
        if stable_uniform(noise.seed, "miss", truth.barcode) < p_miss:
            continue
        bbox = truth.bbox
        if noise.bbox_jitter_px > 0.0:
            rng = stable_rng(noise.seed, "jitter", truth.barcode, frame_key)
            dx, dy, dw, dh = rng.normal(0.0, noise.bbox_jitter_px, size=4)
            bbox = _clip_bbox(bbox[0] + dx, bbox[1] + dy, bbox[2] + dw, bbox[3] + dh)
            if bbox is None:
                continue
        detections.append(
            Detection(
                id=det_id,
                bbox=bbox,
                label="product",
                confidence=max(0.05, 1.0 - p_miss),
            )
        )
        det_id += 1

    if noise.spurious_rate > 0.0:
        rng = stable_rng(noise.seed, "spurious", frame_key)
        for _ in range(int(rng.poisson(noise.spurious_rate))):
            w = float(rng.uniform(24, 120))
            h = float(rng.uniform(24, 120))
            x = float(rng.uniform(0, FRAME_WIDTH - w))
            y = float(rng.uniform(0, FRAME_HEIGHT - h))
            detections.append(
                Detection(id=det_id, bbox=(x, y, w, h), label="product", confidence=0.3)
            )
            det_id += 1

    return detections


def _clip_bbox(x, y, w, h):
    x0 = max(x, 0.0)
    y0 = max(y, 0.0)
    x1 = min(x + max(w, 1.0), float(FRAME_WIDTH))
    y1 = min(y + max(h, 1.0), float(FRAME_HEIGHT))
    if x1 <= x0 or y1 <= y0:
        return None
    return (x0, y0, x1 - x0, y1 - y0)
