"""Detect-match-track state machine tests: cadence, staleness, recovery."""

import numpy as np
import pytest

from shelfguide.matching import MatchScore
from shelfguide.perception import (
    Detection,
    DetectionPrompt,
    HandObservation,
    PerceptionDeps,
    Phase,
    REVALIDATE_EVERY,
    STALE_LIMIT,
    TrackState,
    TrackerLost,
    advance,
    bbox_iou,
    detect,
    observe_hand,
    tracker_step,
)


def frame(idx=0):
    return np.zeros((48, 64, 3), dtype=np.uint8)


class StubDetector:
    def __init__(self, detections=None):
        self.detections = detections if detections is not None else [
            Detection(0, (10.0, 10.0, 20.0, 20.0), "product", 0.9),
            Detection(1, (40.0, 10.0, 20.0, 20.0), "item", 0.8),
            Detection(2, (5.0, 5.0, 10.0, 10.0), "body part", 0.95),
        ]
        self.calls = 0

    def detect(self, frame, prompt):
        self.calls += 1
        return list(self.detections)


class StubTracker:
    def __init__(self, lost_after=None):
        self.bbox = None
        self.updates = 0
        self.lost_after = lost_after

    def start(self, frame, bbox):
        self.bbox = bbox

    def update(self, frame):
        self.updates += 1
        if self.lost_after is not None and self.updates > self.lost_after:
            raise TrackerLost("stub lost")
        return self.bbox


class StubMatcher:
    """Scriptable matcher: fixed search result, scripted region scores."""

    def __init__(self, match_id=0, region_scores=None):
        self.match_id = match_id
        self.region_scores = region_scores if region_scores is not None else [1.0]
        self.score_calls = []

    def best_match(self, crops):
        if self.match_id is None:
            return None
        score = MatchScore(1.0, (1.0, 1.0, 1.0), 1.0, 1.0)
        return self.match_id, score

    def score_region(self, image, bbox):
        idx = min(len(self.score_calls), len(self.region_scores) - 1)
        self.score_calls.append(bbox)
        return self.region_scores[idx]


def deps(detector=None, tracker=None, matcher=None):
    return PerceptionDeps(
        detector=detector or StubDetector(),
        tracker=tracker or StubTracker(),
        matcher=matcher or StubMatcher(),
        prompt=DetectionPrompt(),
    )


class TestDetect:
    def test_filters_to_product_classes(self):
        detector = StubDetector()
        results = detect(frame(), DetectionPrompt(), detector)
        assert [d.label for d in results] == ["product", "item"]

    def test_hand_detection_is_produced_then_filtered(self, shelf):
        from shelfguide.simulator import SyntheticDetector, project_shelf
        from shelfguide.simulator.world import CameraPose

        synth = SyntheticDetector()
        fr = project_shelf(shelf, CameraPose(1.0, 0.0), hand=(640.0, 360.0))
        raw = synth.detect(fr, DetectionPrompt())
        assert any(d.label == "body part" for d in raw)
        kept = detect(fr, DetectionPrompt(), synth)
        assert all(d.label != "body part" for d in kept)

    def test_empty_frame_detects_nothing(self):
        detector = StubDetector(detections=[])
        assert detect(frame(), DetectionPrompt(), detector) == []


class TestTrackerStep:
    def test_requires_lock(self):
        state = TrackState()
        with pytest.raises(ValueError):
            tracker_step(state, frame(), StubTracker())

    def test_static_scene_keeps_bbox(self, shelf):
        from shelfguide.simulator import SyntheticTracker, project_shelf
        from shelfguide.simulator.world import CameraPose

        fr = project_shelf(shelf, CameraPose(1.0, 0.0))
        truth = fr.visible_truths()[4]
        tracker = SyntheticTracker()
        tracker.start(fr, truth.bbox)
        state = TrackState(phase=Phase.LOCKED, anchor_bbox=truth.bbox)
        assert tracker_step(state, fr, tracker) == pytest.approx(truth.bbox)

    def test_small_camera_motion_tracks_within_2px(self, shelf):
        from shelfguide.simulator import SyntheticTracker, project_shelf
        from shelfguide.simulator.world import CameraPose

        fr0 = project_shelf(shelf, CameraPose(1.0, 0.0))
        fr1 = project_shelf(shelf, CameraPose(1.0, 0.0, pan_deg=0.4), frame_idx=1)
        truth0 = fr0.visible_truths()[7]
        truth1 = fr1.truth_for(truth0.barcode)
        shift = abs(truth1.bbox[0] - truth0.bbox[0])
        assert 2.0 < shift < 12.0  # the scene actually moved

        tracker = SyntheticTracker()
        tracker.start(fr0, truth0.bbox)
        state = TrackState(phase=Phase.LOCKED, anchor_bbox=truth0.bbox)
        estimate = tracker_step(state, fr1, tracker)
        assert max(abs(e - g) for e, g in zip(estimate, truth1.bbox)) <= 2.0

    def test_target_removed_raises_lost(self, shelf):
        from shelfguide.simulator import SyntheticTracker, project_shelf
        from shelfguide.simulator.world import CameraPose

        fr0 = project_shelf(shelf, CameraPose(1.0, 0.0))
        truth = fr0.visible_truths()[0]
        tracker = SyntheticTracker()
        tracker.start(fr0, truth.bbox)
        # camera swings away so nothing overlaps the old anchor
        fr1 = project_shelf(shelf, CameraPose(1.0, 0.0, pan_deg=60.0), frame_idx=1)
        state = TrackState(phase=Phase.LOCKED, anchor_bbox=truth.bbox)
        with pytest.raises(TrackerLost):
            tracker_step(state, fr1, tracker)


class TestObserveHand:
    def test_synthetic_passthrough(self, shelf):
        from shelfguide.simulator import SyntheticHandProvider, project_shelf
        from shelfguide.simulator.world import CameraPose

        provider = SyntheticHandProvider()
        fr = project_shelf(shelf, CameraPose(1.0, 0.0), frame_idx=3, hand=(400.0, 300.0))
        obs = observe_hand(fr, provider)
        assert obs == HandObservation((400.0, 300.0), 3)

    def test_no_hand(self, shelf):
        from shelfguide.simulator import SyntheticHandProvider, project_shelf
        from shelfguide.simulator.world import CameraPose

        fr = project_shelf(shelf, CameraPose(1.0, 0.0))
        assert observe_hand(fr, SyntheticHandProvider()).fingertip is None

    def test_out_of_bounds_hand_absent(self, shelf):
        from shelfguide.simulator import SyntheticHandProvider, project_shelf
        from shelfguide.simulator.world import CameraPose

        fr = project_shelf(shelf, CameraPose(1.0, 0.0), hand=(5000.0, 300.0))
        assert observe_hand(fr, SyntheticHandProvider()).fingertip is None


def run_machine(n_frames, matcher, detector=None, tracker=None):
    """Lock on frame 0, then advance through frames 1..n_frames.

    Returns the revalidation frame indices and the state history.
    """
    d = deps(detector=detector, tracker=tracker, matcher=matcher)
    state = advance(TrackState(), frame(0), d)
    assert state.phase is Phase.LOCKED
    reval_frames = []
    history = [state]
    seen_scores = 0
    for idx in range(1, n_frames + 1):
        state = advance(state, frame(idx), d)
        if len(matcher.score_calls) > seen_scores:
            reval_frames.append(idx)
            seen_scores = len(matcher.score_calls)
        history.append(state)
    return reval_frames, history


class TestAdvanceCadence:
    def test_searching_locks_on_match(self):
        d = deps()
        state = advance(TrackState(), frame(), d)
        assert state.phase is Phase.LOCKED
        assert state.anchor_bbox == (10.0, 10.0, 20.0, 20.0)
        assert state.frames_since_validation == 0
        assert state.stale_frames == 0

    def test_searching_stays_when_no_match(self):
        d = deps(matcher=StubMatcher(match_id=None))
        state = advance(TrackState(), frame(), d)
        assert state.phase is Phase.SEARCHING

    def test_revalidations_every_20_frames(self):
        matcher = StubMatcher(region_scores=[1.0])
        reval_frames, history = run_machine(200, matcher)
        assert reval_frames == list(range(20, 201, 20))
        assert all(s.frames_since_validation <= REVALIDATE_EVERY for s in history)
        assert history[-1].phase is Phase.LOCKED

    def test_passing_revalidation_resets_counters(self):
        matcher = StubMatcher(region_scores=[0.51])
        _, history = run_machine(20, matcher)
        assert history[-1].phase is Phase.LOCKED
        assert history[-1].frames_since_validation == 0
        assert history[-1].stale_frames == 0

    def test_boundary_score_passes_at_half(self):
        matcher = StubMatcher(region_scores=[0.5])
        _, history = run_machine(20, matcher)
        assert history[-1].phase is Phase.LOCKED

    def test_low_score_marks_stale_not_searching(self):
        matcher = StubMatcher(region_scores=[0.49])
        _, history = run_machine(20, matcher)
        assert history[-1].phase is Phase.REVALIDATING
        assert history[-1].stale_frames == 1

    def test_research_only_after_stale_exceeds_limit(self):
        matcher = StubMatcher(region_scores=[0.49])
        # failed revalidations start at frame 20; stale_frames reaches the
        # 80-frame budget at frame 99 and the 81st failure re-searches.
        _, history = run_machine(20 + STALE_LIMIT, matcher)
        stale_path = history[20 : 20 + STALE_LIMIT]
        assert all(s.phase is Phase.REVALIDATING for s in stale_path)
        assert stale_path[-1].stale_frames == STALE_LIMIT
        assert history[20 + STALE_LIMIT].phase is Phase.SEARCHING

    def test_recovery_after_transient_staleness(self):
        matcher = StubMatcher(region_scores=[0.49, 0.49, 0.9])
        _, history = run_machine(23, matcher)
        assert history[22].phase is Phase.LOCKED
        assert history[22].stale_frames == 0
        # next revalidation cycle runs 20 frames after the recovery
        assert len(matcher.score_calls) == 3

    def test_tracker_loss_goes_stale_then_recovers(self):
        matcher = StubMatcher(region_scores=[0.0, 0.0, 0.9])
        tracker = StubTracker(lost_after=5)
        d = deps(tracker=tracker, matcher=matcher)
        state = advance(TrackState(), frame(), d)
        for idx in range(1, 7):
            state = advance(state, frame(idx), d)
        assert state.phase is Phase.LOST
        assert state.stale_frames == 1
        state = advance(state, frame(7), d)
        assert state.phase is Phase.LOST
        # the anchor region scores well again: relock with counters reset
        state = advance(state, frame(8), d)
        assert state.phase is Phase.LOCKED
        assert state.stale_frames == 0

    def test_tracker_loss_exhausts_stale_budget(self):
        matcher = StubMatcher(region_scores=[0.0])
        tracker = StubTracker(lost_after=0)
        d = deps(tracker=tracker, matcher=matcher)
        state = advance(TrackState(), frame(), d)
        for idx in range(STALE_LIMIT + 2):
            state = advance(state, frame(idx + 1), d)
            if state.phase is Phase.SEARCHING:
                break
        assert state.phase is Phase.SEARCHING
        assert state.stale_frames == 0

    def test_bit_reproducible_on_identical_frames(self):
        runs = []
        for _ in range(2):
            matcher = StubMatcher(region_scores=[0.49, 0.9])
            _, history = run_machine(60, matcher)
            runs.append([(s.phase, s.frames_since_validation, s.stale_frames) for s in history])
        assert runs[0] == runs[1]


class TestBboxIou:
    def test_disjoint(self):
        assert bbox_iou((0, 0, 10, 10), (20, 20, 5, 5)) == 0.0

    def test_identical(self):
        assert bbox_iou((3, 4, 10, 12), (3, 4, 10, 12)) == pytest.approx(1.0)

    def test_half_overlap(self):
        assert bbox_iou((0, 0, 10, 10), (5, 0, 10, 10)) == pytest.approx(1 / 3)
