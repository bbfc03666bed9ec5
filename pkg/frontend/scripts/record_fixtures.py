"""Record real service responses as JSON fixtures for the UI contract tests.

Run from the repo root (selfcal installed):
    python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from selfcal.service import create_app

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def dump(name: str, payload: dict) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / f"{name}.json").write_text(json.dumps(payload, indent=1, sort_keys=True))
    print(f"wrote {name}.json")


def record() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        app = create_app(data_dir=tmp)
        with TestClient(app) as client:
            # A free-buttons session where one button was used under two
            # colorings: some panels show a two-colored button and go invalid.
            created = client.post("/sessions", json={"mode": "buttons9", "seed": 5}).json()
            sid = created["session_id"]
            client.post(f"/sessions/{sid}/actions", json={"type": "button", "button": 2})
            final = client.post(
                f"/sessions/{sid}/actions", json={"type": "button", "button": 2}
            ).json()
            dump(
                "buttons9_conflict",
                {
                    "created": created,
                    "after": final,
                    "dashboard": client.get(f"/sessions/{sid}/dashboard").json(),
                },
            )

            # A known-buttons session driven to its first decision: the
            # response carries the decision and all panels look the same.
            created = client.post("/sessions", json={"mode": "known2", "seed": 9}).json()
            sid = created["session_id"]
            coloring = created["coloring"]
            known = ["yellow", "grey"]
            body = None
            for _ in range(6):
                button = known.index(coloring[1])
                body = client.post(
                    f"/sessions/{sid}/actions", json={"type": "button", "button": button}
                ).json()
                coloring = body["session"]["coloring"]
                if "decision" in body:
                    break
            assert body and body.get("decision") == 1
            dump(
                "known2_decision",
                {
                    "created": created,
                    "after": body,
                    "dashboard": client.get(f"/sessions/{sid}/dashboard").json(),
                },
            )

            # A touch session mid-identification with points and a grid.
            created = client.post("/sessions", json={"mode": "touch", "seed": 2}).json()
            sid = created["session_id"]
            last = None
            for x, y in [(0.1, 0.2), (0.9, 0.8), (0.2, 0.8), (0.8, 0.1), (0.15, 0.5)]:
                last = client.post(
                    f"/sessions/{sid}/actions", json={"type": "point", "x": x, "y": y}
                ).json()
            dump(
                "touch_midway",
                {
                    "created": created,
                    "after": last,
                    "dashboard": client.get(f"/sessions/{sid}/dashboard").json(),
                },
            )


if __name__ == "__main__":
    record()
