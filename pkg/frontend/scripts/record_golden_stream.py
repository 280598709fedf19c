#!/usr/bin/env python3
"""Record the golden session stream fixture for the UI tests.

Drives a deterministic two-item session through the real service (via
the ASGI test client): navigate, touch the wrong neighbor, receive the
correction, touch the target, then retrieve the second item. The
fixture freezes both the raw stream and the phrase sequence the client
must derive from it (same dedup rule as src/viewState.ts).
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from shelfguide.gateway.service import create_app

FPS = 10  # dwell confirmation = 30 frames at this rate
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden_stream.json"


def phrase_of(message, last_phrase):
    if message["advice"]:
        return message["advice"]["phrase"]
    if message["completed_item"]:
        return f"Retrieved {message['completed_item']}"
    cue = message["cue"]
    if cue and cue["phrase"] != last_phrase:
        return cue["phrase"]
    return None


def scene_center(message, barcode):
    for product in message["scene"]["products"]:
        if product["barcode"] == barcode and product["bbox"]:
            x, y, w, h = product["bbox"]
            return [x + w / 2, y + h / 2]
    raise LookupError(f"{barcode} not visible")


def neighbor_of(message, cell):
    for product in message["scene"]["products"]:
        if product["cell"] == [cell[0], cell[1] + 1]:
            return product
    raise LookupError("no right neighbor")


def main() -> int:
    app = create_app()
    client = TestClient(app)
    created = client.post(
        "/sessions",
        json={
            "fps": FPS,
            "shopping_list": [
                {"brand": "Spindrift", "name": "Lime Sparkling Water"},
                {"brand": "Oreo", "name": "Chocolate Sandwich Cookies"},
            ],
        },
    ).json()
    sid = created["id"]

    messages = []

    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.receive_json()  # initial snapshot (not a tick frame)

        def tick(n=1):
            for _ in range(n):
                client.post(f"/sessions/{sid}/events", json={"type": "tick"})
                messages.append(ws.receive_json())

        def hand(position):
            client.post(
                f"/sessions/{sid}/events",
                json={"type": "hand_move", "position": position},
            )

        tick(4)  # listing -> searching -> navigating
        assert messages[-1]["phase"] == "navigating", messages[-1]["phase"]

        target = messages[-1]["scene"]["target"]
        wrong = neighbor_of(messages[-1], target["cell"])

        hand(scene_center(messages[-1], wrong["barcode"]))
        tick(32)  # dwell on the wrong product -> correction advice
        assert any(m["advice"] for m in messages), "no correction emitted"

        hand(scene_center(messages[-1], target["barcode"]))
        tick(32)  # dwell on the target -> retrieval, next item searching
        assert any(m["completed_item"] for m in messages), "item not completed"

        hand(None)
        tick(4)  # torso-relative navigation toward item 2
        target2 = messages[-1]["scene"]["target"]
        hand(scene_center(messages[-1], target2["barcode"]))
        tick(32)
        assert messages[-1]["phase"] == "done", messages[-1]["phase"]

    phrases = []
    last = None
    pan_checks = 0
    for message in messages:
        phrase = phrase_of(message, last)
        if phrase is not None:
            phrases.append(phrase)
            last = phrase
        son = message["sonification"]
        if son and abs(son["pan"]) >= 0.1:
            pan_checks += 1

    fixture = {
        "recorded_with": "record_golden_stream.py",
        "fps": FPS,
        "expected": {"phrases": phrases, "min_pan_checks": pan_checks},
        "messages": messages,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(messages)} messages, {len(phrases)} phrases, "
          f"{pan_checks} pan sign checks)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
