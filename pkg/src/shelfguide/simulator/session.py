"""Interactive guidance session: drives the perception state machine,
guidance cues, dwell detection and correction over a simulated shelf,
one frame tick at a time.

The engine owns all mutable state for one session and is strictly
single-owner: callers apply events (hand moves, camera moves, ticks) in
order and read immutable snapshots back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from ..catalog import CatalogEntry, EmptyShortlist, ProductQuery, filter_catalog
from ..guidance import (
    CorrectionAdvice,
    GuidanceCue,
    SonificationConfig,
    Stage,
    TouchMonitor,
    ZoneGrid,
    guidance_stage,
    sonification_params,
    zone_of,
)
from ..matching import MatchConfig, build_reference
from ..perception import (
    DetectionPrompt,
    PerceptionDeps,
    Phase as TrackPhase,
    TargetMatcher,
    TrackState,
    advance,
    observe_hand,
)
from ..reasoner import GeometricReasoner, QueryKind, SpatialQuery
from .noise import NoiseModel, ZERO_NOISE
from .synthetic import (
    SyntheticDetector,
    SyntheticEmbedder,
    SyntheticHandProvider,
    SyntheticTracker,
    reference_image,
)
from .world import (
    FRAME_HEIGHT,
    FRAME_WIDTH,
    CameraPose,
    ShelfSpec,
    SyntheticFrame,
    default_shelf,
    project_shelf,
)

DEFAULT_FPS = 30.0


class SessionPhase(Enum):
    LISTING = "listing"
    SEARCHING = "searching"
    NAVIGATING = "navigating"
    CORRECTING = "correcting"
    DONE = "done"


@dataclass
class ListItem:
    entry: CatalogEntry
    cell: tuple[int, int] | None
    done: bool = False

    @property
    def label(self) -> str:
        return f"{self.entry.brand} {self.entry.name}"


@dataclass(frozen=True)
class TickEvents:
    """Everything one tick emitted, for streaming to a client."""

    frame_idx: int
    phase: SessionPhase
    cue: GuidanceCue | None = None
    advice: CorrectionAdvice | None = None
    touched_cell: tuple[int, int] | None = None
    completed_item: str | None = None


class SessionEngine:
    """One three-phase retrieval session over the synthetic shelf."""

    def __init__(
        self,
        shelf: ShelfSpec | None = None,
        catalog: Sequence[CatalogEntry] | None = None,
        noise: NoiseModel = ZERO_NOISE,
        reasoner=None,
        pose: CameraPose | None = None,
        fps: float = DEFAULT_FPS,
        match_cfg: MatchConfig = MatchConfig(),
        sonification: SonificationConfig = SonificationConfig(),
    ):
        self.shelf = shelf or default_shelf()
        self.catalog = list(catalog) if catalog is not None else []
        self.noise = noise
        self.reasoner = reasoner or GeometricReasoner()
        self.pose = pose or CameraPose(1.0, 0.0)
        self.fps = fps
        self.match_cfg = match_cfg
        self.sonification_cfg = sonification

        self.embedder = SyntheticEmbedder(
            self.shelf, perturbation=noise.embedding_perturbation, seed=noise.seed
        )
        self.detector = SyntheticDetector(noise)
        self.hand_provider = SyntheticHandProvider()
        self.prompt = DetectionPrompt()

        self.phase = SessionPhase.LISTING
        self.items: list[ListItem] = []
        self.frame_idx = 0
        self.hand: tuple[float, float] | None = None
        self.track = TrackState()
        self.touch_monitor = TouchMonitor(fps=fps)
        self.last_cue: GuidanceCue | None = None
        self.last_advice: CorrectionAdvice | None = None
        self.last_frame: SyntheticFrame | None = None
        self._deps: PerceptionDeps | None = None
        self._zone_grid = ZoneGrid(FRAME_WIDTH, FRAME_HEIGHT)

    # -- events ---------------------------------------------------------

    def add_query(self, brand: str, name: str, quantity: str | None = None) -> ListItem | None:
        """Resolve a shopping-list query against the catalog (top match)."""
        if not self.catalog:
            return None
        try:
            shortlist = filter_catalog(ProductQuery(brand, name, quantity), self.catalog)
        except (EmptyShortlist, ValueError):
            return None
        entry = shortlist.candidates[0][0]
        try:
            cell = self.shelf.cell_of(entry.barcode)
        except KeyError:
            cell = None
        item = ListItem(entry=entry, cell=cell)
        self.items.append(item)
        return item

    def add_entry(self, entry: CatalogEntry) -> ListItem:
        try:
            cell = self.shelf.cell_of(entry.barcode)
        except KeyError:
            cell = None
        item = ListItem(entry=entry, cell=cell)
        self.items.append(item)
        return item

    def move_hand(self, position: tuple[float, float] | None) -> None:
        self.hand = position

    def move_camera(self, pose: CameraPose) -> None:
        self.pose = pose

    def tick(self) -> TickEvents:
        """Advance the session one frame."""
        self.frame_idx += 1
        frame = project_shelf(self.shelf, self.pose, frame_idx=self.frame_idx, hand=self.hand)
        self.last_frame = frame

        if self.phase is SessionPhase.LISTING:
            return self._tick_listing(frame)
        if self.phase is SessionPhase.SEARCHING:
            return self._tick_searching(frame)
        if self.phase in (SessionPhase.NAVIGATING, SessionPhase.CORRECTING):
            return self._tick_navigating(frame)
        return TickEvents(frame_idx=self.frame_idx, phase=self.phase)

    # -- internals --------------------------------------------------------

    def current_item(self) -> ListItem | None:
        for item in self.items:
            if not item.done:
                return item
        return None

    def _tick_listing(self, frame: SyntheticFrame) -> TickEvents:
        if not any(not item.done for item in self.items):
            self.phase = SessionPhase.DONE
        else:
            self._begin_search()
        return TickEvents(frame_idx=self.frame_idx, phase=self.phase)

    def _begin_search(self) -> None:
        item = self.current_item()
        if item is None:
            self.phase = SessionPhase.DONE
            return
        if item.cell is None:
            # Item not stocked on this shelf: skip it rather than stall.
            item.done = True
            self._begin_search()
            return
        product = self.shelf.products[item.cell]
        reference = build_reference([reference_image(product)], self.embedder)
        matcher = TargetMatcher(reference, self.embedder, self.match_cfg)
        self._deps = PerceptionDeps(
            detector=self.detector,
            tracker=SyntheticTracker(self.noise),
            matcher=matcher,
            prompt=self.prompt,
        )
        self.track = TrackState()
        self.touch_monitor.reset()
        self.phase = SessionPhase.SEARCHING

    def _tick_searching(self, frame: SyntheticFrame) -> TickEvents:
        self.track = advance(self.track, frame, self._deps)
        if self.track.phase in (TrackPhase.LOCKED, TrackPhase.REVALIDATING):
            self.phase = SessionPhase.NAVIGATING
        return TickEvents(frame_idx=self.frame_idx, phase=self.phase)

    def _tick_navigating(self, frame: SyntheticFrame) -> TickEvents:
        self.phase = SessionPhase.NAVIGATING
        self.track = advance(self.track, frame, self._deps)
        if self.track.phase is TrackPhase.SEARCHING:
            self.phase = SessionPhase.SEARCHING
            return TickEvents(frame_idx=self.frame_idx, phase=self.phase)

        item = self.current_item()
        hand_obs = observe_hand(frame, self.hand_provider)
        cue = self._build_cue(frame, hand_obs.fingertip, item)
        self.last_cue = cue

        advice = None
        touched = None
        completed = None
        event = self.touch_monitor.update(
            hand_obs.fingertip, self._product_boxes(frame), self.frame_idx
        )
        if event is not None and item is not None:
            touched = event.product_cell
            if event.product_cell == item.cell:
                item.done = True
                completed = item.label
                self.last_advice = None
                if self.current_item() is None:
                    self.phase = SessionPhase.DONE
                else:
                    self._begin_search()
            else:
                advice = self._build_advice(frame, touched, item)
                self.last_advice = advice
                self.phase = SessionPhase.CORRECTING

        return TickEvents(
            frame_idx=self.frame_idx,
            phase=self.phase,
            cue=cue,
            advice=advice,
            touched_cell=touched,
            completed_item=completed,
        )

    def _product_boxes(self, frame: SyntheticFrame):
        return [(t.cell, t.bbox) for t in frame.visible_truths()]

    def _target_center(self, frame: SyntheticFrame) -> tuple[float, float] | None:
        if self.track.anchor_bbox is not None:
            x, y, w, h = self.track.anchor_bbox
            return (x + w / 2.0, y + h / 2.0)
        return None

    def _build_cue(self, frame, fingertip, item) -> GuidanceCue | None:
        center = self._target_center(frame)
        if center is None or item is None:
            return None
        cx = min(max(center[0], 0.0), float(FRAME_WIDTH))
        cy = min(max(center[1], 0.0), float(FRAME_HEIGHT))
        stage = guidance_stage(fingertip)
        zone = zone_of((cx, cy), self._zone_grid)
        if stage is Stage.TORSO_RELATIVE:
            query = SpatialQuery(
                kind=QueryKind.NAVIGATION,
                target_name=item.label,
                frame_size=frame.size,
                target_bbox=self.track.anchor_bbox,
                image=None,
            )
            answer = self.reasoner.navigate(query)
            phrase = answer.text
            if isinstance(answer.parsed, tuple):
                zone = answer.parsed
            return GuidanceCue(stage=stage, zone=zone, phrase=phrase)
        params = sonification_params(
            fingertip, (cx, cy), frame.size, self.sonification_cfg
        )
        return GuidanceCue(
            stage=stage,
            zone=zone,
            phrase=f"{zone[0]}, {zone[1]}",
            sonification=params,
        )

    def _build_advice(self, frame, touched_cell, item) -> CorrectionAdvice | None:
        query = SpatialQuery(
            kind=QueryKind.CORRECTION,
            target_name=item.label,
            target_cell=item.cell,
            touched_name=self.shelf.products[touched_cell].label,
            touched_cell=touched_cell,
            image=None,
        )
        answer = self.reasoner.correct(query)
        if isinstance(answer.parsed, CorrectionAdvice):
            return answer.parsed
        return None

    # -- snapshots ---------------------------------------------------------

    def scene_descriptor(self) -> dict:
        frame = self.last_frame or project_shelf(
            self.shelf, self.pose, frame_idx=self.frame_idx, hand=self.hand
        )
        item = self.current_item()
        return {
            "frame_size": [FRAME_WIDTH, FRAME_HEIGHT],
            "grid": [self.shelf.tiers, self.shelf.slots_per_tier],
            "products": [
                {
                    "cell": list(t.cell),
                    "barcode": t.barcode,
                    "label": t.label,
                    "bbox": list(t.bbox) if t.bbox else None,
                    "out_of_view": t.out_of_view,
                }
                for t in frame.truths
            ],
            "hand": list(self.hand) if self.hand else None,
            "target": {
                "barcode": item.entry.barcode,
                "cell": list(item.cell) if item.cell else None,
                "label": item.label,
            }
            if item
            else None,
        }

    def snapshot(self) -> dict:
        return {
            "phase": self.phase.value,
            "frame_idx": self.frame_idx,
            "shopping_list": [
                {"label": item.label, "barcode": item.entry.barcode, "done": item.done}
                for item in self.items
            ],
            "track": {
                "phase": self.track.phase.value,
                "anchor_bbox": list(self.track.anchor_bbox)
                if self.track.anchor_bbox
                else None,
                "frames_since_validation": self.track.frames_since_validation,
                "stale_frames": self.track.stale_frames,
            },
            "cue": cue_payload(self.last_cue),
            "advice": advice_payload(self.last_advice),
        }


def cue_payload(cue: GuidanceCue | None) -> dict | None:
    if cue is None:
        return None
    payload = {
        "stage": cue.stage.value,
        "zone": list(cue.zone),
        "phrase": cue.phrase,
        "sonification": None,
    }
    if cue.sonification is not None:
        payload["sonification"] = {
            "pan": cue.sonification.pan,
            "pitch_hz": cue.sonification.pitch_hz,
            "beep_period_ms": cue.sonification.beep_period_ms,
        }
    return payload


def advice_payload(advice: CorrectionAdvice | None) -> dict | None:
    if advice is None:
        return None
    return {
        "mode": advice.mode.value,
        "hops": list(advice.hops) if advice.hops else None,
        "phrase": advice.phrase,
    }


@dataclass(frozen=True)
class SessionEvent:
    """One externally applied session input."""

    type: str  # "tick" | "hand_move" | "camera_move" | "list_query"
    payload: dict = field(default_factory=dict)


def session_step(engine: SessionEngine, event: SessionEvent) -> tuple[dict, TickEvents | None]:
    """Apply one event to a session; returns (snapshot, tick events)."""
    emitted = None
    if event.type == "tick":
        for _ in range(int(event.payload.get("count", 1))):
            emitted = engine.tick()
    elif event.type == "hand_move":
        pos = event.payload.get("position")
        engine.move_hand(tuple(pos) if pos is not None else None)
    elif event.type == "camera_move":
        engine.move_camera(
            CameraPose(
                radius_m=float(event.payload.get("radius_m", engine.pose.radius_m)),
                azimuth_deg=float(event.payload.get("azimuth_deg", engine.pose.azimuth_deg)),
                pan_deg=float(event.payload.get("pan_deg", engine.pose.pan_deg)),
                tilt_deg=float(event.payload.get("tilt_deg", engine.pose.tilt_deg)),
            )
        )
    elif event.type == "list_query":
        engine.add_query(
            event.payload.get("brand", ""),
            event.payload.get("name", ""),
            event.payload.get("quantity"),
        )
    else:
        raise ValueError(f"unknown session event type: {event.type}")
    return engine.snapshot(), emitted
