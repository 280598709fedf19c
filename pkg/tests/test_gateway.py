"""Session service and CLI tests."""

import json

import pytest
from fastapi.testclient import TestClient

from shelfguide.gateway.cli import main
from shelfguide.gateway.service import PROTO_VERSION, create_app
from shelfguide.simulator.scenario import ConfigError, load_scenario, parse_scenario


@pytest.fixture()
def client():
    app = create_app()
    with TestClient(app) as client:
        yield client


def create_session(client, shopping_list=None):
    body = {"shopping_list": shopping_list or [
        {"brand": "Spindrift", "name": "Lime Sparkling Water"}
    ]}
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 200
    return resp.json()


class TestSessionService:
    def test_create_session_starts_in_listing(self, client):
        created = create_session(client)
        assert created["proto_version"] == PROTO_VERSION
        assert created["state"]["phase"] == "listing"
        assert created["state"]["shopping_list"][0]["done"] is False

    def test_get_unknown_session_is_404(self, client):
        assert client.get("/sessions/deadbeef").status_code == 404
        resp = client.post("/sessions/deadbeef/events", json={"type": "tick"})
        assert resp.status_code == 404

    def test_unknown_event_type_rejected(self, client):
        sid = create_session(client)["id"]
        resp = client.post(f"/sessions/{sid}/events", json={"type": "warp"})
        assert resp.status_code == 422

    def test_tick_advances_phase(self, client):
        sid = create_session(client)["id"]
        resp = client.post(f"/sessions/{sid}/events", json={"type": "tick"})
        assert resp.json()["state"]["phase"] == "searching"
        resp = client.post(f"/sessions/{sid}/events", json={"type": "tick", "count": 3})
        assert resp.json()["state"]["phase"] == "navigating"

    def test_snapshot_includes_scene(self, client):
        sid = create_session(client)["id"]
        client.post(f"/sessions/{sid}/events", json={"type": "tick", "count": 4})
        state = client.get(f"/sessions/{sid}").json()
        assert state["scene"]["grid"] == [3, 6]
        assert len(state["scene"]["products"]) == 18

    def test_stream_reflects_hand_move_in_sonification(self, client):
        sid = create_session(client)["id"]
        client.post(f"/sessions/{sid}/events", json={"type": "tick", "count": 4})
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            initial = ws.receive_json()
            assert initial["proto_version"] == PROTO_VERSION

            client.post(
                f"/sessions/{sid}/events",
                json={"type": "hand_move", "position": [200.0, 600.0]},
            )
            client.post(f"/sessions/{sid}/events", json={"type": "tick"})
            message = ws.receive_json()
            assert message["sonification"] is not None
            assert message["cue"]["stage"] == "hand_relative"
            assert message["scene"]["hand"] == [200.0, 600.0]

    def test_stream_messages_strictly_ordered(self, client):
        sid = create_session(client)["id"]
        with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
            ws.receive_json()
            for _ in range(5):
                client.post(f"/sessions/{sid}/events", json={"type": "tick"})
            frames = [ws.receive_json()["frame_idx"] for _ in range(5)]
            assert frames == sorted(frames)
            assert len(set(frames)) == 5

    def test_stream_for_unknown_session_closes(self, client):
        with pytest.raises(Exception):
            with client.websocket_connect("/sessions/nope/stream") as ws:
                ws.receive_json()


class TestScenarioConfig:
    def test_defaults_when_no_file(self):
        scenario = load_scenario(None)
        assert scenario.seed == 0
        assert scenario.reasoner == "geometric"

    def test_round_trip_file(self, tmp_path):
        path = tmp_path / "scenario.json"
        path.write_text(json.dumps({
            "config_version": 1,
            "seed": 9,
            "reasoner": "geometric",
            "noise": {"miss_base": 0.1, "spurious_rate": 0.0},
            "sweep": {"pan_step_deg": 15},
            "camera": {"radius_m": 1.5, "azimuth_deg": 30},
        }))
        scenario = load_scenario(path)
        assert scenario.seed == 9
        assert scenario.noise.miss_base == 0.1
        assert scenario.noise.seed == 9
        assert scenario.sweep.pan_step_deg == 15
        assert scenario.camera.radius_m == 1.5

    def test_missing_file_is_config_error(self):
        with pytest.raises(ConfigError):
            load_scenario("/no/such/file.json")

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            parse_scenario({"config_version": 1, "warp_drive": True})

    def test_bad_version_rejected(self):
        with pytest.raises(ConfigError):
            parse_scenario({"config_version": 99})

    def test_bad_reasoner_rejected(self):
        with pytest.raises(ConfigError):
            parse_scenario({"reasoner": "psychic"})


class TestCli:
    def test_build_list_script_mode(self, tmp_path, capsys):
        queries = tmp_path / "queries.jsonl"
        queries.write_text(
            '{"brand": "Spindrift", "name": "lime sparkling water"}\n'
            '{"brand": "Heinz", "name": "tomato ketchup"}\n'
        )
        out = tmp_path / "list.jsonl"
        code = main(["build-list", "--script", str(queries), "--out", str(out)])
        assert code == 0
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert [l["brand"] for l in lines] == ["Spindrift", "Heinz"]

    def test_build_list_reports_failures(self, tmp_path):
        queries = tmp_path / "queries.jsonl"
        queries.write_text('{"brand": "zzz", "name": "does not exist"}\n')
        out = tmp_path / "list.jsonl"
        assert main(["build-list", "--script", str(queries), "--out", str(out)]) == 1

    def test_eval_check_zero_noise_passes(self, tmp_path):
        code = main(
            ["eval", "--check", "--out-dir", str(tmp_path / "reports"), "--no-figures"]
        )
        assert code == 0
        assert (tmp_path / "reports" / "detection.csv").exists()
        assert (tmp_path / "reports" / "summary.txt").exists()

    def test_eval_missing_config_exits_2(self, tmp_path):
        code = main(["eval", "--config", "/no/such.json", "--out-dir", str(tmp_path)])
        assert code == 2

    def test_eval_navigation_only_writes_figure(self, tmp_path):
        out = tmp_path / "reports"
        code = main(["eval", "--experiment", "navigation", "--out-dir", str(out)])
        assert code == 0
        assert (out / "navigation.csv").exists()
        assert (out / "navigation.png").exists()
        assert not (out / "detection.csv").exists()

    def test_run_sim_completes_direct_policy(self, tmp_path, capsys):
        out = tmp_path / "events.jsonl"
        code = main(["run-sim", "--max-ticks", "1500", "--out", str(out)])
        assert code == 0
        captured = capsys.readouterr()
        assert "retrieved" in captured.out
        records = [json.loads(l) for l in out.read_text().splitlines()]
        assert records[-1]["phase"] == "done"
