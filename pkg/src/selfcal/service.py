"""Session-scoped HTTP API over the engine, with append-only event logs.

The service holds no inference logic: it converts wire bodies into engine
signals, forwards them to ``engine.step`` and mirrors the session back.
Every session writes a JSONL log that replays through the engine to the
identical final state.

Endpoints:
    POST /sessions                    create a session
    GET  /sessions/{id}               current session mirror
    POST /sessions/{id}/actions       submit one action
    GET  /sessions/{id}/dashboard     per-digit hypothesis panels
    GET  /sessions/{id}/log           full event log

Environment:
    SELFCAL_DATA_DIR       log directory (default ./selfcal_data)
    SELFCAL_EMBEDDER_URL   optional external audio embedder endpoint
"""

from __future__ import annotations

import json
import math
import os
import threading
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .consistency import consistency_score_xy
from .core import (
    NUM_DIGITS,
    ButtonPress,
    ContinuousSignal,
    DimensionMismatch,
    EngineConfig,
    InvalidButtonCount,
    InvalidConfig,
    Meaning,
    MixedSignalKinds,
    Mode,
    SessionComplete,
    SessionState,
)
from .engine import (
    button_color_map,
    hypothesis_label_rows,
    new_session,
    scoring_points,
    step,
)
from .signals import AudioClip, Embedder, SpectralBandEmbedder, audio_windows, sketch_vector
from .svm import train_rbf_svm

DASHBOARD_GRID = 40

MODE_ALIASES = {
    "known": (Mode.KNOWN_BUTTONS, 2),
    "known2": (Mode.KNOWN_BUTTONS, 2),
    "buttons": (Mode.FREE_BUTTONS, 9),
    "buttons9": (Mode.FREE_BUTTONS, 9),
    "touch": (Mode.TOUCH, None),
    "sketch": (Mode.SKETCH, None),
    "audio": (Mode.AUDIO, None),
}


class CreateSessionRequest(BaseModel):
    mode: str
    button_count: Optional[int] = None
    seed: Optional[int] = None
    config: Optional[dict] = None


class ExternalEmbedder:
    """Calls a remote embedding endpoint; failures surface as 502."""

    def __init__(self, url: str):
        self.url = url

    def __call__(self, window: np.ndarray, sample_rate: int) -> np.ndarray:
        import httpx

        response = httpx.post(
            self.url,
            json={"window": np.asarray(window).tolist(), "sample_rate": sample_rate},
            timeout=30.0,
        )
        response.raise_for_status()
        return np.asarray(response.json()["embedding"], dtype=np.float64)


class SessionRecord:
    def __init__(self, session: SessionState, log_path: Path):
        self.session = session
        self.log_path = log_path
        self.lock = threading.Lock()


def _wire_session(session_id: str, session: SessionState) -> dict:
    body = {
        "session_id": session_id,
        "mode": session.mode.value,
        "coloring": [c.value for c in session.coloring.colors],
        "posterior": list(session.posterior),
        "valid": list(session.valid),
        "pin_slots": list(session.pin_slots),
        "step_index": session.step_index,
        "complete": session.is_complete,
    }
    if session.mode.discrete:
        body["button_count"] = session.button_count
        colors = button_color_map(session)
        body["button_colors"] = [
            colors[b].value if b in colors else None
            for b in range(session.button_count)
        ]
    return body


def _require_finite(*values: float) -> None:
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
        raise HTTPException(status_code=422, detail="numbers must be finite")


def _body_to_signal(session: SessionState, body: dict, embedder: Embedder):
    kind = body.get("type")
    if kind == "button":
        if not session.mode.discrete:
            raise HTTPException(422, "button actions need a button-mode session")
        button = body.get("button")
        if not isinstance(button, int) or not 0 <= button < session.button_count:
            raise HTTPException(422, f"button must be an int in [0, {session.button_count})")
        return ButtonPress(button)
    if kind == "point":
        if session.mode is not Mode.TOUCH:
            raise HTTPException(422, "point actions need a touch session")
        x, y = body.get("x"), body.get("y")
        if x is None or y is None:
            raise HTTPException(422, "point actions need x and y")
        _require_finite(x, y)
        return ContinuousSignal((float(x), float(y)))
    if kind == "sketch":
        if session.mode is not Mode.SKETCH:
            raise HTTPException(422, "sketch actions need a sketch session")
        points = body.get("points")
        if not isinstance(points, list) or len(points) < 2:
            raise HTTPException(422, "sketch needs at least 2 points")
        for p in points:
            if not isinstance(p, (list, tuple)) or len(p) != 2:
                raise HTTPException(422, "sketch points must be [x, y] pairs")
            _require_finite(*p)
        return ContinuousSignal(tuple(sketch_vector(points)))
    if kind == "audio":
        if session.mode is not Mode.AUDIO:
            raise HTTPException(422, "audio actions need an audio session")
        samples = body.get("samples")
        rate = body.get("sample_rate")
        if not isinstance(samples, list) or len(samples) == 0:
            raise HTTPException(422, "audio needs a non-empty sample array")
        if not isinstance(rate, int) or rate <= 0:
            raise HTTPException(422, "sample_rate must be a positive integer")
        for v in samples:
            _require_finite(v)
        clip = AudioClip(samples=np.asarray(samples, dtype=np.float64), sample_rate=rate)
        rows = []
        for window in audio_windows(clip):
            rows.append(np.asarray(embedder(window, rate), dtype=np.float64).ravel())
        return ContinuousSignal(tuple(np.concatenate(rows)))
    raise HTTPException(422, f"unknown action type {kind!r}")


def _dashboard(session: SessionState) -> dict:
    panels = []
    if session.mode.discrete:
        for d in range(NUM_DIGITS):
            items = [
                {"button": ls.action.button, "color": ls.label.value}
                for ls in session.shared_prior
            ] + [
                {"button": ev.action.button, "color": ev.coloring[d].value}
                for ev in session.history
            ]
            panels.append(
                {
                    "digit": d,
                    "valid": session.valid[d],
                    "score": session.scores[d],
                    "items": items,
                    "grid": None,
                }
            )
        return {"mode": session.mode.value, "panels": panels}

    n_items = len(session.shared_prior) + len(session.history)
    points = scoring_points(session) if n_items else np.zeros((0, 2))
    label_rows = hypothesis_label_rows(session)
    if session.mode is Mode.TOUCH:
        bounds = (0.0, 0.0, 1.0, 1.0)
    elif n_items:
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        pad = max(float(np.max(hi - lo)) * 0.1, 1e-3)
        side = max(float(np.max(hi - lo)) + 2 * pad, 2 * pad)
        cx, cy = (lo + hi) / 2.0
        bounds = (cx - side / 2, cy - side / 2, cx + side / 2, cy + side / 2)
    else:
        bounds = (-1.0, -1.0, 1.0, 1.0)
    for d in range(NUM_DIGITS):
        labels = label_rows[d]
        items = [
            {"x": float(points[i, 0]), "y": float(points[i, 1]), "color": labels[i].value}
            for i in range(n_items)
        ]
        panels.append(
            {
                "digit": d,
                "valid": session.valid[d],
                "score": session.scores[d],
                "items": items,
                "grid": _color_grid(points, labels, bounds, session.config),
            }
        )
    return {"mode": session.mode.value, "panels": panels}


def _color_grid(
    points: np.ndarray, labels, bounds: tuple[float, float, float, float], config: EngineConfig
) -> Optional[dict]:
    """The hypothesis's color map: predicted color at each grid cell center."""

    g = DASHBOARD_GRID
    x0, y0, x1, y1 = bounds
    base = {"size": g, "bounds": [x0, y0, x1, y1]}
    if len(labels) == 0:
        return None
    if len(set(labels)) < 2:
        base["colors"] = [[labels[0].value] * g for _ in range(g)]
        return base
    fn = train_rbf_svm(list(zip(points, labels)), C=config.svm_c, gamma=config.rbf_gamma)
    xs = x0 + (np.arange(g) + 0.5) * (x1 - x0) / g
    ys = y0 + (np.arange(g) + 0.5) * (y1 - y0) / g
    grid_pts = np.array([[x, y] for y in ys for x in xs])
    values = fn.evaluate(grid_pts).reshape(g, g)
    base["colors"] = [
        [Meaning.YELLOW.value if v >= 0 else Meaning.GREY.value for v in row]
        for row in values
    ]
    return base


def create_app(
    data_dir: Optional[str] = None, embedder: Optional[Embedder] = None
) -> FastAPI:
    app = FastAPI(title="selfcal service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    root = Path(data_dir or os.environ.get("SELFCAL_DATA_DIR", "selfcal_data"))
    if embedder is None:
        url = os.environ.get("SELFCAL_EMBEDDER_URL")
        embedder = ExternalEmbedder(url) if url else SpectralBandEmbedder()
    sessions: dict[str, SessionRecord] = {}
    app.state.sessions = sessions
    app.state.data_dir = root
    app.state.embedder = embedder

    def get_record(session_id: str) -> SessionRecord:
        record = sessions.get(session_id)
        if record is None:
            raise HTTPException(404, "unknown session")
        return record

    def append_log(record: SessionRecord, entry: dict) -> None:
        with record.log_path.open("a") as fh:
            fh.write(json.dumps(entry) + "\n")

    @app.post("/sessions")
    def create_session(request: CreateSessionRequest) -> dict:
        if request.mode not in MODE_ALIASES:
            raise HTTPException(400, f"unknown mode {request.mode!r}")
        mode, default_buttons = MODE_ALIASES[request.mode]
        button_count = request.button_count or default_buttons
        seed = request.seed if request.seed is not None else uuid.uuid4().int % 2**32
        try:
            config = EngineConfig.from_dict(request.config or {})
            session = new_session(mode, button_count=button_count, seed=seed, config=config)
        except (InvalidConfig, InvalidButtonCount, TypeError) as exc:
            raise HTTPException(400, str(exc)) from exc
        session_id = uuid.uuid4().hex
        root.mkdir(parents=True, exist_ok=True)
        record = SessionRecord(session, root / f"{session_id}.jsonl")
        sessions[session_id] = record
        append_log(
            record,
            {
                "type": "session",
                "session_id": session_id,
                "mode": request.mode,
                "engine_mode": mode.value,
                "button_count": button_count,
                "seed": seed,
                "config": config.to_dict(),
            },
        )
        return _wire_session(session_id, session)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        record = get_record(session_id)
        with record.lock:
            return _wire_session(session_id, record.session)

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, body: dict) -> dict:
        record = get_record(session_id)
        with record.lock:
            session = record.session
            if session.is_complete:
                raise HTTPException(409, "session complete")
            signal = _body_to_signal(session, body, app.state.embedder)
            try:
                session, decision = step(session, signal)
            except SessionComplete as exc:
                raise HTTPException(409, str(exc)) from exc
            except (MixedSignalKinds, DimensionMismatch, ValueError) as exc:
                raise HTTPException(422, str(exc)) from exc
            append_log(
                record,
                {
                    "type": "action",
                    "body": body,
                    "step_index": session.step_index - 1,
                    "coloring": [c.value for c in session.coloring.colors],
                    "posterior": list(session.posterior),
                    "valid": list(session.valid),
                    "scores": list(session.scores),
                    "decision": decision.digit if decision else None,
                },
            )
            if decision is not None:
                append_log(
                    record,
                    {
                        "type": "decision",
                        "digit": decision.digit,
                        "slot": len(session.pin_slots) - 1,
                        "step_index": decision.step_decided,
                        "scores": list(decision.scores_at_decision),
                    },
                )
            response = {"session": _wire_session(session_id, session)}
            if decision is not None:
                response["decision"] = decision.digit
            return response

    @app.get("/sessions/{session_id}/dashboard")
    def get_dashboard(session_id: str) -> dict:
        record = get_record(session_id)
        with record.lock:
            return _dashboard(record.session)

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str) -> dict:
        record = get_record(session_id)
        with record.lock:
            records = [
                json.loads(line)
                for line in record.log_path.read_text().splitlines()
                if line
            ]
        return {"records": records}

    return app


def replay_log(records: list[dict], embedder: Optional[Embedder] = None) -> SessionState:
    """Re-run a persisted log through the engine; returns the final state.

    Uses the same body-to-signal conversion as the live endpoint, so a
    replayed session reproduces colorings, posteriors and decisions
    bit-identically.
    """

    if not records or records[0].get("type") != "session":
        raise ValueError("log must start with a session record")
    header = records[0]
    embedder = embedder or SpectralBandEmbedder()
    mode = Mode(header["engine_mode"])
    session = new_session(
        mode,
        button_count=header["button_count"],
        seed=header["seed"],
        config=EngineConfig.from_dict(header["config"]),
    )
    for entry in records[1:]:
        if entry.get("type") != "action":
            continue
        signal = _body_to_signal(session, entry["body"], embedder)
        session, _ = step(session, signal)
    return session


app = create_app()
