import numpy as np
import pytest
from fastapi.testclient import TestClient

from selfcal.core import Meaning, Mode
from selfcal.engine import default_known_colors, new_session, step
from selfcal.service import create_app, replay_log
from selfcal.signals import SpectralBandEmbedder
from selfcal.simulator import ButtonUser, user_action
from selfcal.core import ColoringPattern


@pytest.fixture
def client(tmp_path):
    app = create_app(data_dir=str(tmp_path))
    with TestClient(app) as c:
        yield c


def coloring_from(wire):
    return ColoringPattern(tuple(Meaning(c) for c in wire))


def test_create_buttons_session_uniform_posterior(client):
    r = client.post("/sessions", json={"mode": "buttons9"})
    assert r.status_code == 200
    body = r.json()
    assert body["posterior"] == [0.1] * 10
    assert body["valid"] == [True] * 10
    assert body["button_count"] == 9
    assert body["button_colors"] == [None] * 9


def test_create_known_session_has_both_colors(client):
    r = client.post("/sessions", json={"mode": "known2"})
    colors = set(r.json()["coloring"])
    assert colors == {"yellow", "grey"}
    assert r.json()["button_colors"] == ["yellow", "grey"]


def test_same_seed_same_initial_coloring(client):
    a = client.post("/sessions", json={"mode": "touch", "seed": 42}).json()
    b = client.post("/sessions", json={"mode": "touch", "seed": 42}).json()
    assert a["coloring"] == b["coloring"]
    assert a["session_id"] != b["session_id"]


def test_invalid_mode_and_config_rejected(client):
    assert client.post("/sessions", json={"mode": "morse"}).status_code == 400
    r = client.post(
        "/sessions", json={"mode": "touch", "config": {"decision_margin": 0.0}}
    )
    assert r.status_code == 400
    r = client.post("/sessions", json={"mode": "buttons", "button_count": 1})
    assert r.status_code == 400


def test_unknown_session_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.get("/sessions/nope/dashboard").status_code == 404
    assert client.get("/sessions/nope/log").status_code == 404
    assert (
        client.post("/sessions/nope/actions", json={"type": "button", "button": 0})
    ).status_code == 404


def test_button_click_advances_session(client):
    created = client.post("/sessions", json={"mode": "buttons9", "seed": 1}).json()
    sid = created["session_id"]
    r = client.post(
        f"/sessions/{sid}/actions", json={"type": "button", "button": 3}
    )
    assert r.status_code == 200
    session = r.json()["session"]
    assert session["step_index"] == 1


def test_kind_mismatch_is_422(client):
    sid = client.post("/sessions", json={"mode": "buttons9"}).json()["session_id"]
    r = client.post(
        f"/sessions/{sid}/actions", json={"type": "point", "x": 0.5, "y": 0.5}
    )
    assert r.status_code == 422
    sid = client.post("/sessions", json={"mode": "touch"}).json()["session_id"]
    assert (
        client.post(f"/sessions/{sid}/actions", json={"type": "button", "button": 0})
    ).status_code == 422


def test_malformed_signals_are_422(client):
    sid = client.post("/sessions", json={"mode": "touch"}).json()["session_id"]
    r = client.post(
        f"/sessions/{sid}/actions",
        content='{"type": "point", "x": NaN, "y": 0.1}',
        headers={"content-type": "application/json"},
    )
    assert r.status_code == 422
    sid = client.post("/sessions", json={"mode": "sketch"}).json()["session_id"]
    r = client.post(
        f"/sessions/{sid}/actions", json={"type": "sketch", "points": [[0, 0]]}
    )
    assert r.status_code == 422
    sid = client.post("/sessions", json={"mode": "audio"}).json()["session_id"]
    r = client.post(
        f"/sessions/{sid}/actions",
        json={"type": "audio", "samples": [], "sample_rate": 100},
    )
    assert r.status_code == 422
    r = client.post(
        f"/sessions/{sid}/actions",
        json={"type": "audio", "samples": [0.1, 0.2], "sample_rate": 0},
    )
    assert r.status_code == 422


def _drive_known_session_to_digit(client, sid, digit, coloring, max_posts=6):
    """Scripted consistent clicks: press the button whose known color
    matches the digit's current color."""

    known = default_known_colors(2)
    for k in range(max_posts):
        needed = coloring[digit]
        button = known.index(needed)
        r = client.post(
            f"/sessions/{sid}/actions", json={"type": "button", "button": button}
        )
        body = r.json()
        coloring = coloring_from(body["session"]["coloring"])
        if "decision" in body:
            return body, k + 1
    return body, max_posts


def test_known_mode_scripted_decision_within_five_posts(client):
    created = client.post("/sessions", json={"mode": "known2", "seed": 9}).json()
    body, posts = _drive_known_session_to_digit(
        client, created["session_id"], 1, coloring_from(created["coloring"])
    )
    assert body["decision"] == 1
    assert posts <= 5
    assert body["session"]["pin_slots"] == [1]


def test_complete_session_returns_409(client):
    created = client.post("/sessions", json={"mode": "known2", "seed": 3}).json()
    sid = created["session_id"]
    coloring = coloring_from(created["coloring"])
    for _ in range(4):
        body, _ = _drive_known_session_to_digit(client, sid, 7, coloring)
        coloring = coloring_from(body["session"]["coloring"])
    assert body["session"]["complete"] is True
    r = client.post(f"/sessions/{sid}/actions", json={"type": "button", "button": 0})
    assert r.status_code == 409


def test_dashboard_discrete_conflict_panel_invalid(client):
    created = client.post("/sessions", json={"mode": "buttons9", "seed": 5}).json()
    sid = created["session_id"]
    coloring = created["coloring"]
    client.post(f"/sessions/{sid}/actions", json={"type": "button", "button": 2})
    # Press the same button again; any digit that changed color now holds a
    # two-colored button in its panel and must be invalid.
    second = client.post(
        f"/sessions/{sid}/actions", json={"type": "button", "button": 2}
    ).json()["session"]
    dash = client.get(f"/sessions/{sid}/dashboard").json()
    flipped = [d for d in range(10) if second["coloring"][d] != coloring[d]]
    for panel in dash["panels"]:
        d = panel["digit"]
        dot_colors = {item["color"] for item in panel["items"] if item["button"] == 2}
        assert panel["valid"] == (len(dot_colors) == 1)
        assert panel["valid"] == second["valid"][d]


def test_dashboard_identical_panels_after_decision(client):
    created = client.post("/sessions", json={"mode": "known2", "seed": 11}).json()
    sid = created["session_id"]
    body, _ = _drive_known_session_to_digit(
        client, sid, 4, coloring_from(created["coloring"])
    )
    assert "decision" in body
    dash = client.get(f"/sessions/{sid}/dashboard").json()
    first_items = dash["panels"][0]["items"]
    assert all(p["items"] == first_items for p in dash["panels"])


def test_dashboard_empty_session_ten_valid_panels(client):
    sid = client.post("/sessions", json={"mode": "touch"}).json()["session_id"]
    dash = client.get(f"/sessions/{sid}/dashboard").json()
    assert len(dash["panels"]) == 10
    assert all(p["valid"] for p in dash["panels"])
    assert all(p["items"] == [] for p in dash["panels"])


def test_dashboard_continuous_has_points_and_grid(client):
    sid = client.post("/sessions", json={"mode": "touch", "seed": 2}).json()[
        "session_id"
    ]
    pts = [(0.1, 0.2), (0.9, 0.8), (0.2, 0.8), (0.8, 0.1)]
    for x, y in pts:
        client.post(f"/sessions/{sid}/actions", json={"type": "point", "x": x, "y": y})
    dash = client.get(f"/sessions/{sid}/dashboard").json()
    panel = dash["panels"][0]
    assert len(panel["items"]) == 4
    grid = panel["grid"]
    assert grid["size"] == 40
    assert len(grid["colors"]) == 40
    assert set(sum(grid["colors"], [])) <= {"yellow", "grey"}


def test_log_of_fresh_session_is_header_only(client):
    sid = client.post("/sessions", json={"mode": "touch", "seed": 0}).json()[
        "session_id"
    ]
    records = client.get(f"/sessions/{sid}/log").json()["records"]
    assert len(records) == 1
    assert records[0]["type"] == "session"


def test_log_counts_one_decision_record_per_digit(client):
    created = client.post("/sessions", json={"mode": "known2", "seed": 13}).json()
    sid = created["session_id"]
    coloring = coloring_from(created["coloring"])
    for _ in range(4):
        body, _ = _drive_known_session_to_digit(client, sid, 2, coloring)
        coloring = coloring_from(body["session"]["coloring"])
    records = client.get(f"/sessions/{sid}/log").json()["records"]
    decisions = [r for r in records if r["type"] == "decision"]
    assert len(decisions) == 4
    assert all(r["digit"] == 2 for r in decisions)


def test_replay_reproduces_final_state_bit_identically(client):
    created = client.post("/sessions", json={"mode": "touch", "seed": 17}).json()
    sid = created["session_id"]
    rng_pts = [(0.12, 0.3), (0.8, 0.44), (0.33, 0.9), (0.71, 0.2), (0.05, 0.55)]
    for x, y in rng_pts:
        client.post(f"/sessions/{sid}/actions", json={"type": "point", "x": x, "y": y})
    final = client.get(f"/sessions/{sid}").json()
    records = client.get(f"/sessions/{sid}/log").json()["records"]
    replayed = replay_log(records)
    assert list(replayed.posterior) == final["posterior"]
    assert [c.value for c in replayed.coloring.colors] == final["coloring"]
    assert replayed.pin_slots == final["pin_slots"]
    assert replayed.step_index == final["step_index"]


def test_replay_identity_for_audio_sessions(client):
    sid = client.post("/sessions", json={"mode": "audio", "seed": 23}).json()[
        "session_id"
    ]
    sr = 400
    t = np.arange(sr) / sr
    for freq in (55.0, 160.0, 90.0):
        samples = np.sin(2 * np.pi * freq * t).tolist()
        r = client.post(
            f"/sessions/{sid}/actions",
            json={"type": "audio", "samples": samples, "sample_rate": sr},
        )
        assert r.status_code == 200
    final = client.get(f"/sessions/{sid}").json()
    records = client.get(f"/sessions/{sid}/log").json()["records"]
    replayed = replay_log(records)
    assert list(replayed.posterior) == final["posterior"]


def test_service_holds_no_inference_logic(client):
    # Drive the service and the engine side by side on the same seed and
    # actions; every mirrored quantity must match exactly.
    created = client.post("/sessions", json={"mode": "buttons9", "seed": 31}).json()
    sid = created["session_id"]
    session = new_session(Mode.FREE_BUTTONS, button_count=9, seed=31)
    assert [c.value for c in session.coloring.colors] == created["coloring"]
    import random as _r

    rng = _r.Random(0)
    from selfcal.core import ButtonPress

    for _ in range(9):
        button = rng.randrange(9)
        wire = client.post(
            f"/sessions/{sid}/actions", json={"type": "button", "button": button}
        ).json()["session"]
        session, _ = step(session, ButtonPress(button))
        assert wire["posterior"] == list(session.posterior)
        assert wire["valid"] == list(session.valid)
        assert wire["coloring"] == [c.value for c in session.coloring.colors]
        assert wire["pin_slots"] == session.pin_slots


def test_sketch_actions_flow_through_feature_pipeline(client):
    sid = client.post("/sessions", json={"mode": "sketch", "seed": 3}).json()[
        "session_id"
    ]
    stroke_v = [[0.0, 1.0], [0.5, 0.0], [1.0, 1.0]]
    stroke_bar = [[0.0, 0.0], [1.0, 0.05], [2.0, 0.0]]
    r = client.post(
        f"/sessions/{sid}/actions", json={"type": "sketch", "points": stroke_v}
    )
    assert r.status_code == 200
    r = client.post(
        f"/sessions/{sid}/actions", json={"type": "sketch", "points": stroke_bar}
    )
    assert r.status_code == 200
    dash = client.get(f"/sessions/{sid}/dashboard").json()
    assert len(dash["panels"][0]["items"]) == 2


def test_external_embedder_round_trip(tmp_path):
    # Stand up a tiny embedding endpoint and point the service at it.
    from fastapi import FastAPI

    embed_app = FastAPI()

    @embed_app.post("/embed")
    def embed(body: dict) -> dict:
        window = np.asarray(body["window"], dtype=float)
        return {"embedding": [float(window.sum()), float(np.abs(window).sum())]}

    class AsgiEmbedder:
        def __call__(self, window, sample_rate):
            with TestClient(embed_app) as c:
                r = c.post(
                    "/embed",
                    json={"window": np.asarray(window).tolist(), "sample_rate": sample_rate},
                )
                r.raise_for_status()
                return np.asarray(r.json()["embedding"])

    app = create_app(data_dir=str(tmp_path), embedder=AsgiEmbedder())
    with TestClient(app) as client:
        sid = client.post("/sessions", json={"mode": "audio", "seed": 1}).json()[
            "session_id"
        ]
        sr = 200
        samples = np.sin(np.arange(sr) / 7.0).tolist()
        r = client.post(
            f"/sessions/{sid}/actions",
            json={"type": "audio", "samples": samples, "sample_rate": sr},
        )
        assert r.status_code == 200
        assert r.json()["session"]["step_index"] == 1
