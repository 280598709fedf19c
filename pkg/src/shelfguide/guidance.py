"""Spatial guidance: 5x3 frame zones, two-stage cue selection, stereo
sonification parameters, dwell-based touch detection and shelf-grid
correction phrasing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

H_ZONE_NAMES = ("far left", "left", "middle", "right", "far right")
V_ZONE_NAMES = ("upper", "center", "lower")

FINE_HOP_LIMIT = 4  # Manhattan distance above which feedback goes coarse
DWELL_CONFIRM_MS = 3000.0

_NUMBER_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five"}


class OutOfFrame(ValueError):
    """Point lies outside the frame bounds."""


class OutOfGrid(ValueError):
    """Cell lies outside the shelf grid."""


class Stage(Enum):
    TORSO_RELATIVE = "torso_relative"
    HAND_RELATIVE = "hand_relative"


class CorrectionMode(Enum):
    FINE = "fine"
    COARSE = "coarse"
    CONFIRMED = "confirmed"


@dataclass(frozen=True)
class ZoneGrid:
    width: int
    height: int

    @property
    def h_zones(self) -> tuple[str, ...]:
        return H_ZONE_NAMES

    @property
    def v_zones(self) -> tuple[str, ...]:
        return V_ZONE_NAMES


@dataclass(frozen=True)
class SonificationParams:
    pan: float  # -1 fully left .. +1 fully right
    pitch_hz: float
    beep_period_ms: float


@dataclass(frozen=True)
class SonificationConfig:
    f_min_hz: float = 220.0
    f_max_hz: float = 880.0
    period_far_ms: float = 400.0
    period_near_ms: float = 100.0


@dataclass(frozen=True)
class GuidanceCue:
    stage: Stage
    zone: tuple[str, str]
    phrase: str
    sonification: SonificationParams | None = None

    def __post_init__(self):
        if self.stage is Stage.TORSO_RELATIVE and self.sonification is not None:
            raise ValueError("sonification only applies to hand-relative cues")


@dataclass(frozen=True)
class TouchEvent:
    product_cell: tuple[int, int]
    started_at: int
    dwell_ms: float
    confirmed: bool


@dataclass(frozen=True)
class CorrectionAdvice:
    """Correction feedback; `hops` is None only when parsed back from a
    coarse phrase, which carries direction but not exact counts."""

    mode: CorrectionMode
    hops: tuple[int, int] | None
    phrase: str


def zone_of(point: tuple[float, float], grid: ZoneGrid) -> tuple[str, str]:
    """Map an in-frame point to its (horizontal, vertical) zone names.

    The frame splits into 5 equal columns and 3 equal rows; indices are
    floor(5x/w) and floor(3y/h) with the far edges clamped inward.
    """
    x, y = point
    if not (0 <= x <= grid.width and 0 <= y <= grid.height):
        raise OutOfFrame(f"point {point} outside {grid.width}x{grid.height} frame")
    hi = min(int(5 * x / grid.width), 4)
    vi = min(int(3 * y / grid.height), 2)
    return H_ZONE_NAMES[hi], V_ZONE_NAMES[vi]


def guidance_stage(fingertip: tuple[float, float] | None) -> Stage:
    """Torso-relative until a fingertip is visible; no hysteresis."""
    return Stage.HAND_RELATIVE if fingertip is not None else Stage.TORSO_RELATIVE


def sonification_params(
    fingertip: tuple[float, float],
    target_center: tuple[float, float],
    frame: tuple[int, int],
    cfg: SonificationConfig = SonificationConfig(),
) -> SonificationParams:
    """Map fingertip-to-target displacement to pan/pitch/cadence.

    Pan follows the signed horizontal offset (left target = left channel);
    pitch rises and beeps accelerate linearly as the distance closes, from
    (f_min, period_far) at half the frame diagonal to (f_max, period_near)
    on top of the target.
    """
    width, height = frame
    for px, py in (fingertip, target_center):
        if not (0 <= px <= width and 0 <= py <= height):
            raise OutOfFrame(f"point ({px}, {py}) outside {width}x{height} frame")

    dx = target_center[0] - fingertip[0]
    dy = target_center[1] - fingertip[1]
    pan = max(-1.0, min(1.0, dx / (width / 2.0)))

    d_max = math.hypot(width, height) / 2.0
    closeness = 1.0 - min(math.hypot(dx, dy), d_max) / d_max
    pitch = cfg.f_min_hz + (cfg.f_max_hz - cfg.f_min_hz) * closeness
    period = cfg.period_far_ms - (cfg.period_far_ms - cfg.period_near_ms) * closeness
    return SonificationParams(pan=pan, pitch_hz=pitch, beep_period_ms=period)


class TouchMonitor:
    """Tracks continuous fingertip dwell inside product boxes.

    Feed one observation per frame; a confirmed TouchEvent fires once the
    fingertip has stayed inside the same product's box for the full dwell
    threshold (3 s).  Any frame outside that box resets the clock.
    """

    def __init__(self, fps: float = 30.0, confirm_ms: float = DWELL_CONFIRM_MS):
        self.fps = fps
        self.confirm_ms = confirm_ms
        self._cell: tuple[int, int] | None = None
        self._started_at: int = 0
        self._frames_inside: int = 0

    def reset(self) -> None:
        self._cell = None
        self._frames_inside = 0

    def update(
        self,
        fingertip: tuple[float, float] | None,
        boxes: Iterable[tuple[tuple[int, int], tuple[float, float, float, float]]],
        frame_idx: int,
    ) -> TouchEvent | None:
        """Advance one frame; boxes are ((tier, slot), (x, y, w, h)) pairs."""
        cell = None
        if fingertip is not None:
            fx, fy = fingertip
            for candidate_cell, (bx, by, bw, bh) in boxes:
                if bx <= fx <= bx + bw and by <= fy <= by + bh:
                    cell = candidate_cell
                    break
        if cell is None or cell != self._cell:
            self._cell = cell
            self._started_at = frame_idx
            self._frames_inside = 1 if cell is not None else 0
            return None

        self._frames_inside += 1
        dwell_ms = self._frames_inside * 1000.0 / self.fps
        if dwell_ms >= self.confirm_ms:
            event = TouchEvent(
                product_cell=cell,
                started_at=self._started_at,
                dwell_ms=dwell_ms,
                confirmed=True,
            )
            self.reset()
            return event
        return None


def hop_vector(
    touched: tuple[int, int],
    target: tuple[int, int],
    grid: tuple[int, int] | None = None,
) -> tuple[int, int]:
    """Signed (column, row) hop counts from touched cell to target cell.

    Cells are (tier, slot) with tier 0 at the top, so positive d_row
    means "down" and positive d_col means "right".
    """
    if grid is not None:
        tiers, slots = grid
        for tier, slot in (touched, target):
            if not (0 <= tier < tiers and 0 <= slot < slots):
                raise OutOfGrid(f"cell ({tier}, {slot}) outside {tiers}x{slots} grid")
    d_col = target[1] - touched[1]
    d_row = target[0] - touched[0]
    return d_col, d_row


def correction_phrase(hops: tuple[int, int]) -> CorrectionAdvice:
    """Render hop counts as corrective speech.

    Zero hops confirms the target; separations of up to 4 products get an
    exact fine-grained phrase; anything farther collapses to a coarse
    "far left/right" (or up/down when the offset is purely vertical).
    """
    d_col, d_row = hops
    total = abs(d_col) + abs(d_row)
    if total == 0:
        return CorrectionAdvice(CorrectionMode.CONFIRMED, hops, "Target product reached")
    if total > FINE_HOP_LIMIT:
        if d_col != 0:
            direction = "left" if d_col < 0 else "right"
        else:
            direction = "up" if d_row < 0 else "down"
        return CorrectionAdvice(CorrectionMode.COARSE, hops, f"far {direction}")

    parts = []
    if d_col != 0:
        parts.append(_hop_part(abs(d_col), "to the left" if d_col < 0 else "to the right"))
    if d_row != 0:
        parts.append(_hop_part(abs(d_row), "up" if d_row < 0 else "down"))
    phrase = ", ".join(parts)
    phrase = phrase[0].upper() + phrase[1:]
    return CorrectionAdvice(CorrectionMode.FINE, hops, phrase)


def _hop_part(count: int, direction: str) -> str:
    noun = "product" if count == 1 else "products"
    return f"{_NUMBER_WORDS.get(count, str(count))} {noun} {direction}"
