"""Pluggable perception: detector / tracker / hand-landmark interfaces and
the detect-match-track state machine.

The state machine searches until the matcher locks onto the target, then
leans on the tracker, revalidating the tracked region against the target
reference every 20 frames.  A revalidation score below 0.5 marks the
track stale; more than 80 stale frames without a successful validation
sends the session back to a fresh detection-matching cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Protocol, Sequence

import numpy as np

from .matching import Embedder, MatchConfig, ReferenceSet, match_detections, score_crop

REVALIDATE_EVERY = 20  # frames between validations of the tracked region
REVALIDATE_THRESHOLD = 0.5  # fused score below this marks the frame stale
STALE_LIMIT = 80  # stale frames tolerated before re-searching

DEFAULT_CLASSES = ("product", "item", "human", "body part")
DEFAULT_PRODUCT_CLASSES = ("product", "item")

Bbox = tuple[float, float, float, float]  # (x, y, w, h) pixels


class DetectorFailure(RuntimeError):
    """The detector backend failed; propagated unchanged."""


class TrackerLost(RuntimeError):
    """The tracker's position estimate collapsed."""


class Phase(Enum):
    SEARCHING = "searching"
    LOCKED = "locked"
    REVALIDATING = "revalidating"
    LOST = "lost"


@dataclass(frozen=True)
class Detection:
    id: int
    bbox: Bbox
    label: str
    confidence: float


@dataclass(frozen=True)
class DetectionPrompt:
    """Open-vocabulary prompt: the full class list steadies the detector;
    only product classes are kept for matching."""

    classes: tuple[str, ...] = DEFAULT_CLASSES
    product_classes: tuple[str, ...] = DEFAULT_PRODUCT_CLASSES

    def __post_init__(self):
        if not set(self.product_classes) <= set(self.classes):
            raise ValueError("product_classes must be a subset of classes")


@dataclass(frozen=True)
class HandObservation:
    fingertip: tuple[float, float] | None
    timestamp: int


@dataclass(frozen=True)
class TrackState:
    phase: Phase = Phase.SEARCHING
    anchor_bbox: Bbox | None = None
    frames_since_validation: int = 0
    stale_frames: int = 0
    matched_detection: int | None = None
    last_score: float | None = None


class Detector(Protocol):
    def detect(self, frame, prompt: DetectionPrompt) -> list[Detection]: ...


class Tracker(Protocol):
    def start(self, frame, bbox: Bbox) -> None: ...

    def update(self, frame) -> Bbox:
        """Next bbox estimate; raises TrackerLost when confidence collapses."""
        ...


class HandProvider(Protocol):
    def observe(self, frame) -> HandObservation: ...


class TargetMatcher:
    """Scores detection crops against one product's reference descriptors."""

    def __init__(self, reference: ReferenceSet, embedder: Embedder,
                 cfg: MatchConfig = MatchConfig()):
        self.reference = reference
        self.embedder = embedder
        self.cfg = cfg

    def best_match(self, crops: Sequence[tuple[int, np.ndarray]]):
        return match_detections(crops, self.reference, self.embedder, self.cfg)

    def score_region(self, image: np.ndarray, bbox: Bbox) -> float:
        """Fused similarity of one frame region against the reference."""
        crop = crop_image(image, bbox)
        if crop.size == 0:
            return 0.0
        return score_crop(crop, self.reference, self.embedder, self.cfg).s_final


@dataclass
class PerceptionDeps:
    detector: Detector
    tracker: Tracker
    matcher: TargetMatcher
    prompt: DetectionPrompt = field(default_factory=DetectionPrompt)


def frame_image(frame) -> np.ndarray:
    """Accept either a bare image array or an object with an `.image`."""
    if isinstance(frame, np.ndarray):
        return frame
    return frame.image


def crop_image(image: np.ndarray, bbox: Bbox) -> np.ndarray:
    x, y, w, h = bbox
    height, width = image.shape[:2]
    x0 = max(0, int(round(x)))
    y0 = max(0, int(round(y)))
    x1 = min(width, int(round(x + w)))
    y1 = min(height, int(round(y + h)))
    return image[y0:y1, x0:x1]


def detect(frame, prompt: DetectionPrompt, detector: Detector) -> list[Detection]:
    """Run the detector and keep only product-class detections."""
    detections = detector.detect(frame, prompt)
    keep = set(prompt.product_classes)
    return [d for d in detections if d.label in keep]


def tracker_step(state: TrackState, frame, tracker: Tracker) -> Bbox:
    """Advance the tracker one frame; only valid while a lock is held."""
    if state.phase not in (Phase.LOCKED, Phase.REVALIDATING):
        raise ValueError(f"tracker_step requires a lock, state is {state.phase}")
    return tracker.update(frame)


def observe_hand(frame, provider: HandProvider) -> HandObservation:
    return provider.observe(frame)


def advance(state: TrackState, frame, deps: PerceptionDeps) -> TrackState:
    """One frame of the detect-match-track state machine.

    Failures are states, not exceptions: a lost tracker or a stale
    revalidation degrades the phase and eventually re-enters Searching.
    """
    if state.phase is Phase.SEARCHING:
        return _search(frame, deps)

    if state.phase in (Phase.LOCKED, Phase.REVALIDATING):
        try:
            bbox = tracker_step(state, frame, deps.tracker)
        except TrackerLost:
            return _go_stale(replace(state, phase=Phase.LOST), frame, deps)
        state = replace(state, anchor_bbox=bbox)
        if state.phase is Phase.LOCKED:
            state = replace(state, frames_since_validation=state.frames_since_validation + 1)
            if state.frames_since_validation < REVALIDATE_EVERY:
                return state
            state = replace(state, phase=Phase.REVALIDATING)
        return _revalidate(state, frame, deps)

    # Phase.LOST: no usable track; behaves as stale until re-search.
    return _go_stale(state, frame, deps)


def _search(frame, deps: PerceptionDeps) -> TrackState:
    detections = detect(frame, deps.prompt, deps.detector)
    image = frame_image(frame)
    crops = [(d.id, crop_image(image, d.bbox)) for d in detections]
    crops = [(i, c) for i, c in crops if c.size > 0]
    result = deps.matcher.best_match(crops)
    if result is None:
        return TrackState(phase=Phase.SEARCHING)
    det_id, score = result
    bbox = next(d.bbox for d in detections if d.id == det_id)
    deps.tracker.start(frame, bbox)
    return TrackState(
        phase=Phase.LOCKED,
        anchor_bbox=bbox,
        frames_since_validation=0,
        stale_frames=0,
        matched_detection=det_id,
        last_score=score.s_final,
    )


def _revalidate(state: TrackState, frame, deps: PerceptionDeps) -> TrackState:
    detections = detect(frame, deps.prompt, deps.detector)
    image = frame_image(frame)
    region = _reanchor_bbox(state.anchor_bbox, detections)
    score = deps.matcher.score_region(image, region)
    if score >= REVALIDATE_THRESHOLD:
        deps.tracker.start(frame, region)
        return replace(
            state,
            phase=Phase.LOCKED,
            anchor_bbox=region,
            frames_since_validation=0,
            stale_frames=0,
            last_score=score,
        )
    return _mark_stale(replace(state, last_score=score))


def _go_stale(state: TrackState, frame, deps: PerceptionDeps) -> TrackState:
    """LOST handling: keep trying to revalidate the last anchor while the
    stale budget lasts."""
    if state.anchor_bbox is None:
        return TrackState(phase=Phase.SEARCHING)
    image = frame_image(frame)
    score = deps.matcher.score_region(image, state.anchor_bbox)
    if score >= REVALIDATE_THRESHOLD:
        deps.tracker.start(frame, state.anchor_bbox)
        return replace(
            state,
            phase=Phase.LOCKED,
            frames_since_validation=0,
            stale_frames=0,
            last_score=score,
        )
    return _mark_stale(replace(state, last_score=score))


def _mark_stale(state: TrackState) -> TrackState:
    stale = state.stale_frames + 1
    if stale > STALE_LIMIT:
        return TrackState(phase=Phase.SEARCHING)
    return replace(state, stale_frames=stale)


def _reanchor_bbox(anchor: Bbox, detections: Sequence[Detection]) -> Bbox:
    """Fresh detection bbox overlapping the track best, else the track itself."""
    best = anchor
    best_iou = 0.0
    for det in detections:
        iou = bbox_iou(anchor, det.bbox)
        if iou > best_iou:
            best_iou = iou
            best = det.bbox
    return best


def bbox_iou(a: Bbox, b: Bbox) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(ax, bx)
    iy = max(ay, by)
    ix1 = min(ax + aw, bx + bw)
    iy1 = min(ay + ah, by + bh)
    if ix1 <= ix or iy1 <= iy:
        return 0.0
    inter = (ix1 - ix) * (iy1 - iy)
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0
