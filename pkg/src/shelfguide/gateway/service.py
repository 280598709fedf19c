"""Session service: HTTP control endpoints plus a per-session WebSocket
stream of scene descriptors, cues and sonification parameters.

Each session is owned by one event loop; events are applied under a
per-session lock, so stream messages are strictly ordered with monotone
frame indices.  The stream carries vector scene state, never pixels.
"""

from __future__ import annotations

import asyncio
import itertools
import secrets
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from ..catalog import CatalogEntry, load_catalog
from ..inventory import fixture_catalog_path, fixture_entries
from ..simulator.noise import DEFAULT_NOISE, ZERO_NOISE, NoiseModel
from ..simulator.scenario import _parse_camera
from ..simulator.session import SessionEngine, SessionEvent, session_step

PROTO_VERSION = 1

_EVENT_TYPES = ("tick", "hand_move", "camera_move", "list_query")


class BindFailure(OSError):
    """The service address could not be bound."""


@dataclass
class SessionRecord:
    engine: SessionEngine
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)
    counter: itertools.count = field(default_factory=itertools.count)

    def stream_message(self, emitted=None) -> dict:
        from ..simulator.session import advice_payload, cue_payload

        snapshot = self.engine.snapshot()
        # Cue reflects the current tick; advice only the tick it fired on
        # (the engine snapshot keeps the last advice for GET resyncs).
        cue = cue_payload(emitted.cue) if emitted is not None else snapshot["cue"]
        message = {
            "proto_version": PROTO_VERSION,
            "seq": next(self.counter),
            "frame_idx": snapshot["frame_idx"],
            "phase": snapshot["phase"],
            "scene": self.engine.scene_descriptor(),
            "cue": cue,
            "sonification": (cue or {}).get("sonification"),
            "advice": advice_payload(getattr(emitted, "advice", None)),
            "shopping_list": snapshot["shopping_list"],
            "completed_item": getattr(emitted, "completed_item", None),
            "touched_cell": list(emitted.touched_cell)
            if emitted is not None and emitted.touched_cell
            else None,
        }
        return message

    def publish(self, message: dict) -> None:
        for queue in list(self.subscribers):
            queue.put_nowait(message)


def _load_default_catalog() -> list[CatalogEntry]:
    path = fixture_catalog_path()
    if path.exists():
        return load_catalog(path)
    return fixture_entries()


def create_app(catalog: list[CatalogEntry] | None = None) -> FastAPI:
    app = FastAPI(title="shelfguide session service")
    # The browser client is served from its own origin during development.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.catalog = catalog if catalog is not None else _load_default_catalog()
    app.state.sessions = {}

    def _get_record(session_id: str) -> SessionRecord:
        record = app.state.sessions.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"session {session_id} not found")
        return record

    @app.post("/sessions")
    async def create_session(body: dict = Body(default={})) -> dict:
        noise = _parse_noise_choice(body.get("noise"), body.get("seed"))
        engine = SessionEngine(
            catalog=app.state.catalog,
            noise=noise,
            pose=_parse_camera(body.get("camera")),
            fps=float(body.get("fps", 30.0)),
        )
        for query in body.get("shopping_list", []):
            engine.add_query(
                query.get("brand", ""), query.get("name", ""), query.get("quantity")
            )
        session_id = secrets.token_hex(8)
        app.state.sessions[session_id] = SessionRecord(engine=engine)
        return {
            "id": session_id,
            "proto_version": PROTO_VERSION,
            "state": engine.snapshot(),
        }

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str) -> dict:
        record = _get_record(session_id)
        async with record.lock:
            return {
                "id": session_id,
                "proto_version": PROTO_VERSION,
                "state": record.engine.snapshot(),
                "scene": record.engine.scene_descriptor(),
            }

    @app.post("/sessions/{session_id}/events")
    async def post_event(session_id: str, body: dict = Body(...)) -> dict:
        record = _get_record(session_id)
        event_type = body.get("type")
        if event_type not in _EVENT_TYPES:
            raise HTTPException(status_code=422, detail=f"unknown event type {event_type!r}")
        payload = {k: v for k, v in body.items() if k != "type"}
        async with record.lock:
            try:
                snapshot, emitted = session_step(
                    record.engine, SessionEvent(type=event_type, payload=payload)
                )
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            if event_type == "tick":
                record.publish(record.stream_message(emitted))
        return {"id": session_id, "proto_version": PROTO_VERSION, "state": snapshot}

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str) -> None:
        record = app.state.sessions.get(session_id)
        if record is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        queue: asyncio.Queue = asyncio.Queue()
        record.subscribers.append(queue)
        try:
            async with record.lock:
                await websocket.send_json(record.stream_message())
            while True:
                message = await queue.get()
                await websocket.send_json(message)
        except WebSocketDisconnect:
            pass
        finally:
            if queue in record.subscribers:
                record.subscribers.remove(queue)

    return app


def _parse_noise_choice(choice, seed) -> NoiseModel:
    seed = int(seed) if seed is not None else 0
    if choice in (None, "zero"):
        base = ZERO_NOISE
    elif choice == "default":
        base = DEFAULT_NOISE
    elif isinstance(choice, dict):
        from ..simulator.scenario import _parse_noise

        return _parse_noise(choice, seed)
    else:
        raise HTTPException(status_code=422, detail=f"unknown noise spec {choice!r}")
    return NoiseModel(**{**base.__dict__, "seed": seed})


def serve(
    host: str = "127.0.0.1",
    port: int = 8787,
    catalog: list[CatalogEntry] | None = None,
) -> None:
    """Run the session service until interrupted."""
    import uvicorn

    app = create_app(catalog=catalog)
    try:
        uvicorn.run(app, host=host, port=port, log_level="info")
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
