"""End-to-end session engine tests: the three-phase retrieval loop."""

import pytest

from shelfguide.inventory import fixture_entries
from shelfguide.simulator import CameraPose, ZERO_NOISE
from shelfguide.simulator.session import (
    SessionEngine,
    SessionEvent,
    SessionPhase,
    session_step,
)


def make_engine(queries=(), pose=None):
    engine = SessionEngine(
        catalog=fixture_entries(),
        noise=ZERO_NOISE,
        pose=pose or CameraPose(1.0, 0.0),
    )
    for brand, name in queries:
        engine.add_query(brand, name)
    return engine


def target_center(engine):
    frame = engine.last_frame
    item = engine.current_item()
    truth = frame.truth_for(item.entry.barcode)
    return truth.center


def run_until(engine, predicate, limit=2000):
    for _ in range(limit):
        emitted = engine.tick()
        if predicate(engine, emitted):
            return emitted
    raise AssertionError(f"condition not reached within {limit} ticks")


class TestSessionLifecycle:
    def test_empty_list_completes_immediately(self):
        engine = make_engine()
        emitted = engine.tick()
        assert emitted.phase is SessionPhase.DONE

    def test_unresolvable_query_is_ignored(self):
        engine = make_engine()
        assert engine.add_query("no such brand", "no such product") is None
        assert engine.items == []

    def test_listing_to_searching_to_navigating(self):
        engine = make_engine([("Spindrift", "Lime Sparkling Water")])
        first = engine.tick()
        assert first.phase is SessionPhase.SEARCHING
        emitted = run_until(engine, lambda e, ev: e.phase is SessionPhase.NAVIGATING, 10)
        assert engine.track.anchor_bbox is not None

    def test_torso_stage_until_hand_appears(self):
        engine = make_engine([("Spindrift", "Lime Sparkling Water")])
        run_until(engine, lambda e, ev: e.phase is SessionPhase.NAVIGATING, 10)
        emitted = engine.tick()
        assert emitted.cue is not None
        assert emitted.cue.stage.value == "torso_relative"
        assert emitted.cue.sonification is None

        engine.move_hand((640.0, 700.0))
        emitted = engine.tick()
        assert emitted.cue.stage.value == "hand_relative"
        assert emitted.cue.sonification is not None

    def test_direct_touch_completes_item_and_session(self):
        engine = make_engine([("Spindrift", "Lime Sparkling Water")])
        run_until(engine, lambda e, ev: e.phase is SessionPhase.NAVIGATING, 10)
        engine.move_hand(target_center(engine))
        emitted = run_until(
            engine, lambda e, ev: ev.completed_item is not None, limit=120
        )
        assert emitted.completed_item == "Spindrift Lime Sparkling Water"
        assert engine.phase is SessionPhase.DONE

    def test_wrong_touch_triggers_correction_and_keeps_item(self):
        engine = make_engine([("Spindrift", "Lime Sparkling Water")])
        run_until(engine, lambda e, ev: e.phase is SessionPhase.NAVIGATING, 10)
        target_item = engine.current_item()
        wrong_cell = (target_item.cell[0], target_item.cell[1] + 1)
        wrong_center = next(
            t.center for t in engine.last_frame.visible_truths() if t.cell == wrong_cell
        )
        engine.move_hand(wrong_center)
        emitted = run_until(engine, lambda e, ev: ev.advice is not None, limit=120)
        assert emitted.phase is SessionPhase.CORRECTING
        assert emitted.advice.phrase == "One product to the left"
        assert engine.current_item() is target_item
        assert not target_item.done
        # session returns to navigating and can still finish
        engine.move_hand(target_center(engine))
        run_until(engine, lambda e, ev: ev.completed_item is not None, limit=200)

    def test_two_item_list_advances_to_next_search(self):
        engine = make_engine(
            [("Spindrift", "Lime Sparkling Water"), ("Heinz", "Tomato Ketchup")]
        )
        run_until(engine, lambda e, ev: e.phase is SessionPhase.NAVIGATING, 10)
        engine.move_hand(target_center(engine))
        emitted = run_until(engine, lambda e, ev: ev.completed_item is not None, 120)
        assert emitted.completed_item == "Spindrift Lime Sparkling Water"
        assert engine.phase is SessionPhase.SEARCHING
        assert engine.current_item().label == "Heinz Tomato Ketchup"

        engine.move_hand(None)
        run_until(engine, lambda e, ev: e.phase is SessionPhase.NAVIGATING, 10)
        engine.move_hand(target_center(engine))
        run_until(engine, lambda e, ev: ev.completed_item is not None, 120)
        assert engine.phase is SessionPhase.DONE
        assert all(item.done for item in engine.items)

    def test_snapshot_shape(self):
        engine = make_engine([("Spindrift", "Lime Sparkling Water")])
        engine.tick()
        snap = engine.snapshot()
        assert set(snap) == {"phase", "frame_idx", "shopping_list", "track", "cue", "advice"}
        assert snap["shopping_list"][0]["label"] == "Spindrift Lime Sparkling Water"
        scene = engine.scene_descriptor()
        assert scene["grid"] == [3, 6]
        assert len(scene["products"]) == 18
        assert scene["target"]["cell"] == [0, 0]


class TestSessionStep:
    def test_event_dispatch(self):
        engine = make_engine([("Spindrift", "Lime Sparkling Water")])
        snap, emitted = session_step(engine, SessionEvent("tick", {"count": 3}))
        assert snap["frame_idx"] == 3
        assert emitted is not None

        snap, emitted = session_step(
            engine, SessionEvent("hand_move", {"position": [10.0, 20.0]})
        )
        assert engine.hand == (10.0, 20.0)
        assert emitted is None

        session_step(engine, SessionEvent("camera_move", {"radius_m": 1.5}))
        assert engine.pose.radius_m == 1.5

        session_step(
            engine,
            SessionEvent("list_query", {"brand": "Heinz", "name": "Tomato Ketchup"}),
        )
        assert len(engine.items) == 2

    def test_unknown_event_rejected(self):
        engine = make_engine()
        with pytest.raises(ValueError):
            session_step(engine, SessionEvent("explode", {}))
