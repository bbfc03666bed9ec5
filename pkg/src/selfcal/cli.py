"""Command-line harness: run seeded closed-loop scenarios and report.

Example:
    selfcal-sim run --mode touch --pin 1234 --seeds 0..19 --report out.jsonl
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path
from typing import Optional

from .core import EngineConfig, Mode
from .engine import default_known_colors
from .simulator import (
    DEFAULT_SKETCH_PROTOTYPES,
    ButtonUser,
    ScenarioReport,
    SketchUser,
    half_plane_user,
    run_scenario,
)

MODE_CHOICES = {
    "known": (Mode.KNOWN_BUTTONS, 2),
    "buttons9": (Mode.FREE_BUTTONS, 9),
    "touch": (Mode.TOUCH, None),
    "sketch": (Mode.SKETCH, None),
}


def parse_seeds(spec: str) -> list[int]:
    """Accepts '7', '0..99' (inclusive) or '1,2,5'."""

    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    if "," in spec:
        return [int(s) for s in spec.split(",") if s]
    return [int(spec)]


def parse_pin(spec: str) -> tuple[int, ...]:
    if len(spec) != 4 or not spec.isdigit():
        raise ValueError("pin must be 4 digits, e.g. 1234")
    return tuple(int(c) for c in spec)


def load_config(path: Optional[str]) -> tuple[EngineConfig, dict]:
    if path is None:
        return EngineConfig(), {}
    raw = json.loads(Path(path).read_text())
    engine = EngineConfig.from_dict(raw.get("engine", {}))
    return engine, raw.get("user", {})


def build_user(mode_name: str, pin: tuple[int, ...], seed: int, user_cfg: dict):
    noise = bool(user_cfg.get("noise", False))
    if mode_name == "known":
        mapping = dict(enumerate(default_known_colors(2)))
        return ButtonUser(mapping=mapping, pin=pin, seed=seed)
    if mode_name == "buttons9":
        import random as _random

        rng = _random.Random(seed)
        colors = default_known_colors(9)
        mapping = dict(enumerate(rng.sample(colors, len(colors))))
        return ButtonUser(mapping=mapping, pin=pin, seed=seed)
    if mode_name == "touch":
        return half_plane_user(pin=pin, seed=seed, noise=noise)
    if mode_name == "sketch":
        return SketchUser(prototypes=DEFAULT_SKETCH_PROTOTYPES, pin=pin, seed=seed)
    raise ValueError(f"unknown mode {mode_name!r}")


def summarize(reports: list[ScenarioReport]) -> str:
    lines = []
    completed = [r for r in reports if r.completed]
    lines.append(f"runs: {len(reports)}   completed: {len(completed)}")
    for slot in range(4):
        clicks = [r.clicks_per_digit[slot] for r in reports if r.decided[slot] is not None]
        if not clicks:
            lines.append(f"digit {slot + 1}: never decided")
            continue
        ok = sum(1 for r in reports if r.correct[slot])
        lines.append(
            f"digit {slot + 1}: decided {len(clicks):4d}  correct {ok:4d}  "
            f"clicks mean {statistics.mean(clicks):5.2f}  "
            f"median {statistics.median(clicks):5.1f}"
        )
    total_time = sum(r.wall_clock for r in reports)
    lines.append(f"wall clock: {total_time:.2f}s")
    return "\n".join(lines)


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="selfcal-sim")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run seeded closed-loop scenarios")
    run.add_argument("--mode", choices=sorted(MODE_CHOICES), required=True)
    run.add_argument("--pin", default="1234")
    run.add_argument("--seeds", default="0", help="e.g. 7, 0..99 or 1,2,5")
    run.add_argument("--config", default=None, help="JSON file: {engine:{..},user:{..}}")
    run.add_argument("--report", default=None, help="JSONL output path")
    run.add_argument("--max-steps", type=int, default=100)
    args = parser.parse_args(argv)

    mode, button_count = MODE_CHOICES[args.mode]
    pin = parse_pin(args.pin)
    engine_cfg, user_cfg = load_config(args.config)
    reports = []
    for seed in parse_seeds(args.seeds):
        user = build_user(args.mode, pin, seed, user_cfg)
        reports.append(
            run_scenario(
                user,
                mode,
                engine_seed=seed,
                button_count=button_count,
                config=engine_cfg,
                max_steps=args.max_steps,
            )
        )
    if args.report:
        with open(args.report, "w") as fh:
            for r in reports:
                fh.write(json.dumps(r.to_dict()) + "\n")
    print(summarize(reports))
    return 0


if __name__ == "__main__":
    sys.exit(main())
