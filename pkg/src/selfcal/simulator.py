"""Simulated users and a closed-loop harness for reproducing engine behavior.

Users come in two honest flavors (buttons with a private color mapping,
points on a map with a private color function) and two adversarial ones
that key their action on the color pair of digits 0 and 1, which keeps both
digits plausible forever.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .core import (
    PIN_LENGTH,
    ActionSignal,
    ButtonPress,
    ColoringPattern,
    ContinuousSignal,
    EngineConfig,
    Meaning,
    Mode,
)
from .engine import button_color_map, new_session, step
from .signals import sketch_vector

# Change-of-color boundary clearance for sampled map points; set noise=True
# on the samplers to allow boundary-straddling points.
DEFAULT_MARGIN = 0.05


@dataclass
class ButtonUser:
    """Presses a uniformly random button whose private color matches the need."""

    mapping: dict[int, Meaning]
    pin: tuple[int, ...]
    seed: int = 0
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(set(self.mapping.values())) < 2:
            raise ValueError("a button user needs at least one button per color")
        if len(self.pin) != PIN_LENGTH:
            raise ValueError(f"pin must have {PIN_LENGTH} digits")
        self.rng = random.Random(self.seed)


@dataclass
class MapUser:
    """Places points on a plane split by a private color function."""

    color_fn: Callable[[float, float], Meaning]
    sampler: Callable[[Meaning, random.Random], tuple[float, float]]
    pin: tuple[int, ...]
    seed: int = 0
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.pin) != PIN_LENGTH:
            raise ValueError(f"pin must have {PIN_LENGTH} digits")
        self.rng = random.Random(self.seed)


@dataclass
class SketchUser:
    """Draws one of two private stroke shapes, jittered, scaled and moved."""

    prototypes: dict[Meaning, tuple[tuple[float, float], ...]]
    pin: tuple[int, ...]
    seed: int = 0
    jitter: float = 0.03
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.rng = random.Random(self.seed)


@dataclass
class AdversarialButtonUser:
    """Reserves one button per (digit0 color, digit1 color) combination.

    Acting this way is simultaneously consistent with typing a 0 and with
    typing a 1, so neither can ever be eliminated.
    """

    combo_buttons: dict[tuple[Meaning, Meaning], int] = field(
        default_factory=lambda: {
            (Meaning.YELLOW, Meaning.YELLOW): 0,
            (Meaning.YELLOW, Meaning.GREY): 1,
            (Meaning.GREY, Meaning.YELLOW): 3,
            (Meaning.GREY, Meaning.GREY): 4,
        }
    )
    pin: tuple[int, ...] = (0, 0, 0, 0)
    seed: int = 0


@dataclass
class AdversarialMapUser:
    """Reserves one quadrant of the unit square per color combination."""

    pin: tuple[int, ...] = (0, 0, 0, 0)
    seed: int = 0
    rng: random.Random = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.rng = random.Random(self.seed)

    def quadrant(self, combo: tuple[Meaning, Meaning]) -> tuple[float, float, float, float]:
        c0, c1 = combo
        x0, x1 = (0.0, 0.45) if c0 is Meaning.YELLOW else (0.55, 1.0)
        y0, y1 = (0.55, 1.0) if c1 is Meaning.YELLOW else (0.0, 0.45)
        return x0, x1, y0, y1


SimulatedUser = Union[
    ButtonUser, MapUser, SketchUser, AdversarialButtonUser, AdversarialMapUser
]


def user_action(
    user: SimulatedUser, coloring: ColoringPattern, target_digit: int
) -> ActionSignal:
    """What the user does when their current digit wears ``coloring[target]``."""

    needed = coloring[target_digit]
    if isinstance(user, ButtonUser):
        candidates = [b for b, c in sorted(user.mapping.items()) if c is needed]
        return ButtonPress(user.rng.choice(candidates))
    if isinstance(user, MapUser):
        x, y = user.sampler(needed, user.rng)
        return ContinuousSignal((x, y))
    if isinstance(user, SketchUser):
        return ContinuousSignal(tuple(_jittered_sketch(user, needed)))
    combo = (coloring[0], coloring[1])
    if isinstance(user, AdversarialButtonUser):
        return ButtonPress(user.combo_buttons[combo])
    x0, x1, y0, y1 = user.quadrant(combo)
    return ContinuousSignal(
        (user.rng.uniform(x0, x1), user.rng.uniform(y0, y1))
    )


def _jittered_sketch(user: SketchUser, meaning: Meaning) -> Sequence[float]:
    proto = user.prototypes[meaning]
    rng = user.rng
    scale = rng.uniform(0.5, 2.0)
    dx, dy = rng.uniform(-5, 5), rng.uniform(-5, 5)
    points = [
        (
            x * scale + dx + rng.gauss(0.0, user.jitter * scale),
            y * scale + dy + rng.gauss(0.0, user.jitter * scale),
        )
        for x, y in proto
    ]
    return sketch_vector(points)


DEFAULT_SKETCH_PROTOTYPES = {
    # A "V"-like check stroke vs a flat left-to-right bar.
    Meaning.YELLOW: ((0.0, 1.0), (0.5, 0.0), (1.0, 1.0)),
    Meaning.GREY: ((0.0, 0.0), (0.5, 0.05), (1.0, 0.0)),
}


def half_plane_user(
    pin: tuple[int, ...],
    seed: int = 0,
    split: float = 0.5,
    margin: float = DEFAULT_MARGIN,
    noise: bool = False,
) -> MapUser:
    """Left-of-split means yellow, right means grey."""

    gap = 0.0 if noise else margin

    def color_fn(x: float, y: float) -> Meaning:
        return Meaning.YELLOW if x < split else Meaning.GREY

    def sampler(meaning: Meaning, rng: random.Random) -> tuple[float, float]:
        if meaning is Meaning.YELLOW:
            x = rng.uniform(0.0, split - gap)
        else:
            x = rng.uniform(split + gap, 1.0)
        return x, rng.uniform(0.0, 1.0)

    return MapUser(color_fn=color_fn, sampler=sampler, pin=pin, seed=seed)


def _rejection_sampler(
    color_fn: Callable[[float, float], Meaning],
    draw: Callable[[random.Random], tuple[float, float]],
    signed_clearance: Callable[[float, float], float],
    gap: float,
) -> Callable[[Meaning, random.Random], tuple[float, float]]:
    def sampler(meaning: Meaning, rng: random.Random) -> tuple[float, float]:
        for _ in range(10_000):
            x, y = draw(rng)
            if color_fn(x, y) is meaning and signed_clearance(x, y) >= gap:
                return x, y
        raise RuntimeError("sampler failed to place a point; region too tight")

    return sampler


def generate_case(kind: str, seed: int, noise: bool = False) -> MapUser:
    """Build the three benchmark map users: structured, unstructured, deceptive.

    Structured: two well-separated blobs matching the color regions, so a
    cluster-first method succeeds.  Unstructured: a single central blob cut
    by a diagonal color boundary (no visible clusters).  Deceptive: two
    blobs separated left/right while the colors split top/bottom, so the
    visible structure points the wrong way.
    """

    rng = random.Random(seed)
    pin = tuple(rng.randrange(10) for _ in range(PIN_LENGTH))
    gap = 0.0 if noise else DEFAULT_MARGIN

    def clamp_draw(cx: float, cy: float, sd: float):
        def draw(r: random.Random) -> tuple[float, float]:
            return r.gauss(cx, sd), r.gauss(cy, sd)

        return draw

    if kind == "structured":

        def color_fn(x: float, y: float) -> Meaning:
            return Meaning.YELLOW if x < 0.5 else Meaning.GREY

        def sampler(meaning: Meaning, r: random.Random) -> tuple[float, float]:
            cx = 0.22 if meaning is Meaning.YELLOW else 0.78
            draw = clamp_draw(cx, 0.5, 0.07)
            return _rejection_sampler(
                color_fn, draw, lambda x, y: abs(x - 0.5), gap
            )(meaning, r)

    elif kind == "unstructured":

        def color_fn(x: float, y: float) -> Meaning:
            return Meaning.YELLOW if x + y < 1.0 else Meaning.GREY

        # Keep the blob gap-free: a wide clearance band would cut the single
        # Gaussian into two visible clusters along the color boundary.
        draw = clamp_draw(0.5, 0.5, 0.16)
        sampler = _rejection_sampler(
            color_fn, draw, lambda x, y: abs(x + y - 1.0) / math.sqrt(2.0),
            min(gap, 0.01),
        )

    elif kind == "deceptive":

        def color_fn(x: float, y: float) -> Meaning:
            return Meaning.YELLOW if y > 0.5 else Meaning.GREY

        def sampler(meaning: Meaning, r: random.Random) -> tuple[float, float]:
            cx = 0.2 if r.random() < 0.5 else 0.8
            draw = clamp_draw(cx, 0.5, 0.09)
            return _rejection_sampler(
                color_fn, draw, lambda x, y: abs(y - 0.5), gap
            )(meaning, r)

    else:
        raise ValueError(f"unknown case kind: {kind!r}")

    return MapUser(color_fn=color_fn, sampler=sampler, pin=pin, seed=seed)


@dataclass
class ScenarioReport:
    """Everything a closed-loop run produced, JSON-ready via ``to_dict``."""

    mode: str
    pin: tuple[int, ...]
    engine_seed: int
    clicks_per_digit: list[int]
    decided: list[Optional[int]]
    correct: list[bool]
    budget_exhausted_at: Optional[int]
    color_map: dict
    total_steps: int
    wall_clock: float

    @property
    def completed(self) -> bool:
        return all(d is not None for d in self.decided)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "pin": list(self.pin),
            "engine_seed": self.engine_seed,
            "clicks_per_digit": self.clicks_per_digit,
            "decided": self.decided,
            "correct": self.correct,
            "budget_exhausted_at": self.budget_exhausted_at,
            "color_map": self.color_map,
            "total_steps": self.total_steps,
            "wall_clock": self.wall_clock,
        }


def run_scenario(
    user: SimulatedUser,
    mode: Mode,
    engine_seed: int = 0,
    button_count: Optional[int] = None,
    config: Optional[EngineConfig] = None,
    max_steps: int = 100,
    max_digits: int = PIN_LENGTH,
) -> ScenarioReport:
    """Drive a full closed loop: user acts, engine steps, until PIN or budget.

    A digit whose step budget runs out ends the run (recorded, not raised);
    the remaining slots stay undecided.
    """

    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    t0 = time.perf_counter()
    session = new_session(mode, button_count=button_count, seed=engine_seed, config=config)
    clicks = [0] * PIN_LENGTH
    decided: list[Optional[int]] = [None] * PIN_LENGTH
    exhausted: Optional[int] = None
    total = 0
    while not session.is_complete and len(session.pin_slots) < max_digits:
        slot = len(session.pin_slots)
        if clicks[slot] >= max_steps:
            exhausted = slot
            break
        action = user_action(user, session.coloring, user.pin[slot])
        session, decision = step(session, action)
        clicks[slot] += 1
        total += 1
        if decision is not None:
            decided[slot] = decision.digit
    correct = [d is not None and d == p for d, p in zip(decided, user.pin)]
    if session.mode.discrete:
        color_map = {
            "buttons": {
                str(b): c.value for b, c in sorted(button_color_map(session).items())
            }
        }
    else:
        labels = [ls.label for ls in session.shared_prior]
        color_map = {
            "points": len(labels),
            "yellow": sum(1 for c in labels if c is Meaning.YELLOW),
            "grey": sum(1 for c in labels if c is Meaning.GREY),
        }
    return ScenarioReport(
        mode=mode.value,
        pin=tuple(user.pin),
        engine_seed=engine_seed,
        clicks_per_digit=clicks,
        decided=decided,
        correct=correct,
        budget_exhausted_at=exhausted,
        color_map=color_map,
        total_steps=total,
        wall_clock=time.perf_counter() - t0,
    )
