"""Domain types shared by the whole engine.

Everything here is construction and validation only; behavior lives in the
other modules.  The protocol is fixed at 10 digit intents, 2 meanings
(yellow/grey) and a 4-slot PIN; widening either is a constant change, not a
redesign.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

NUM_DIGITS = 10
NUM_MEANINGS = 2
PIN_LENGTH = 4


class SelfCalError(Exception):
    """Base class for engine errors."""


class InvalidConfig(SelfCalError):
    pass


class InvalidButtonCount(SelfCalError):
    pass


class MixedSignalKinds(SelfCalError):
    """A discrete action reached a continuous pipeline or vice versa."""


class SessionComplete(SelfCalError):
    """All PIN slots are already filled."""


class NoValidHypothesis(SelfCalError):
    """Every digit hypothesis was eliminated: inconsistent user or bug."""


class SingleClass(SelfCalError):
    """Classifier training needs at least one point of each meaning."""


class DimensionMismatch(SelfCalError):
    pass


class TooFewPoints(SelfCalError):
    pass


class EmptyClip(SelfCalError):
    pass


class EmbedderFailure(SelfCalError):
    """An audio embedder raised; never silently zero-filled."""


class Meaning(Enum):
    """The binary message an action conveys. There is no 'none' or 'both'."""

    YELLOW = "yellow"
    GREY = "grey"

    def other(self) -> "Meaning":
        return Meaning.GREY if self is Meaning.YELLOW else Meaning.YELLOW


class Provenance(Enum):
    HYPOTHETICAL = "hypothetical"
    PROPAGATED = "propagated"


class Mode(Enum):
    KNOWN_BUTTONS = "known"
    FREE_BUTTONS = "buttons"
    TOUCH = "touch"
    SKETCH = "sketch"
    AUDIO = "audio"

    @property
    def discrete(self) -> bool:
        return self in (Mode.KNOWN_BUTTONS, Mode.FREE_BUTTONS)


class ProjectionKind(Enum):
    PRINCIPAL_COMPONENTS = "pca"
    EXTERNAL_2D = "external"


@dataclass(frozen=True)
class ButtonPress:
    """Discrete action: the index of the pressed button."""

    button: int

    def __post_init__(self) -> None:
        if not isinstance(self.button, int) or self.button < 0:
            raise ValueError(f"button index must be a non-negative int, got {self.button!r}")


@dataclass(frozen=True)
class ContinuousSignal:
    """Continuous action: a finite feature vector (2-D point, sketch features, ...)."""

    features: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.features) < 1:
            raise ValueError("continuous signal needs at least one feature")
        if not all(math.isfinite(v) for v in self.features):
            raise ValueError("continuous signal features must be finite")
        object.__setattr__(self, "features", tuple(float(v) for v in self.features))

    @property
    def dim(self) -> int:
        return len(self.features)


ActionSignal = Union[ButtonPress, ContinuousSignal]


@dataclass(frozen=True)
class ColoringPattern:
    """The digit -> meaning assignment displayed at one step.

    Always contains both colors: an all-one-color pattern carries no
    information and the coloring policy never emits one.
    """

    colors: tuple[Meaning, ...]

    def __post_init__(self) -> None:
        if len(self.colors) != NUM_DIGITS:
            raise ValueError(f"coloring must cover all {NUM_DIGITS} digits")
        present = set(self.colors)
        if len(present) < NUM_MEANINGS:
            raise ValueError("coloring must contain at least one digit of each color")

    def __getitem__(self, digit: int) -> Meaning:
        return self.colors[digit]

    def swapped(self) -> "ColoringPattern":
        return ColoringPattern(tuple(c.other() for c in self.colors))


@dataclass(frozen=True)
class InteractionEvent:
    """One user action together with the coloring displayed when it was made."""

    action: ActionSignal
    coloring: ColoringPattern
    step_index: int

    def __post_init__(self) -> None:
        if self.step_index < 0:
            raise ValueError("step_index must be >= 0")


@dataclass(frozen=True)
class LabeledSignal:
    """An action with an attached meaning.

    Hypothetical labels follow a digit hypothesis and are recomputed freely;
    propagated labels are settled ground truth and never change again.
    """

    action: ActionSignal
    label: Meaning
    provenance: Provenance


@dataclass
class HypothesisDataset:
    """The action history as it would look if ``intent`` were the true digit."""

    intent: int
    items: list[LabeledSignal]

    def __post_init__(self) -> None:
        if not 0 <= self.intent < NUM_DIGITS:
            raise ValueError(f"intent must be a digit 0-{NUM_DIGITS - 1}")


GAMMA_MEDIAN = "median"


@dataclass
class EngineConfig:
    """Tunables for decision making and consistency scoring.

    ``rbf_gamma`` is either a positive float or ``"median"`` for the
    scale-free median-distance heuristic, recomputed per dataset.
    """

    decision_margin: float = 0.15
    consecutive_steps: int = 2
    min_points: int = 12
    svm_c: float = 10.0
    rbf_gamma: Union[float, str] = GAMMA_MEDIAN
    cv_folds: int = 5
    posterior_sharpness: float = 10.0
    projection: ProjectionKind = ProjectionKind.PRINCIPAL_COMPONENTS

    def validate(self) -> None:
        if not 0.0 < self.decision_margin < 1.0:
            raise InvalidConfig("decision_margin must lie in (0, 1)")
        if self.consecutive_steps < 1:
            raise InvalidConfig("consecutive_steps must be >= 1")
        if self.min_points < 1:
            raise InvalidConfig("min_points must be >= 1")
        if not self.svm_c > 0:
            raise InvalidConfig("svm_c must be positive")
        if isinstance(self.rbf_gamma, str):
            if self.rbf_gamma != GAMMA_MEDIAN:
                raise InvalidConfig(f"rbf_gamma must be positive or '{GAMMA_MEDIAN}'")
        elif not self.rbf_gamma > 0:
            raise InvalidConfig("rbf_gamma must be positive")
        if self.cv_folds < 2:
            raise InvalidConfig("cv_folds must be >= 2")
        if not self.posterior_sharpness > 0:
            raise InvalidConfig("posterior_sharpness must be positive")
        if not isinstance(self.projection, ProjectionKind):
            raise InvalidConfig("projection must be a ProjectionKind")

    def to_dict(self) -> dict:
        return {
            "decision_margin": self.decision_margin,
            "consecutive_steps": self.consecutive_steps,
            "min_points": self.min_points,
            "svm_c": self.svm_c,
            "rbf_gamma": self.rbf_gamma,
            "cv_folds": self.cv_folds,
            "posterior_sharpness": self.posterior_sharpness,
            "projection": self.projection.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        kwargs = dict(data)
        if "projection" in kwargs:
            kwargs["projection"] = ProjectionKind(kwargs["projection"])
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg


def admissible_button_colorings(button_count: int) -> int:
    """Number of usable color assignments for ``button_count`` buttons.

    Every button is yellow or grey, but at least one of each color must exist
    so the user can express both meanings: 2^B total minus the two
    single-color assignments.
    """

    if button_count < 1:
        raise InvalidButtonCount("button_count must be >= 1")
    return 2**button_count - 2


@dataclass
class SessionState:
    """Full state of one PIN-entry session.

    A session is a value: no interior sharing, no global state.  Engine
    operations mutate a session they exclusively hold and return it; copy
    via ``to_dict``/``from_dict`` when an independent snapshot is needed.
    """

    mode: Mode
    config: EngineConfig
    rng_seed: int
    rng: random.Random = field(repr=False, compare=False, default_factory=random.Random)
    button_count: Optional[int] = None
    known_colors: Optional[tuple[Meaning, ...]] = None
    pin_slots: list[int] = field(default_factory=list)
    history: list[InteractionEvent] = field(default_factory=list)
    shared_prior: list[LabeledSignal] = field(default_factory=list)
    posterior: list[float] = field(default_factory=lambda: [1.0 / NUM_DIGITS] * NUM_DIGITS)
    valid: list[bool] = field(default_factory=lambda: [True] * NUM_DIGITS)
    scores: list[float] = field(default_factory=lambda: [1.0] * NUM_DIGITS)
    score_history: list[list[float]] = field(default_factory=list)
    coloring: Optional[ColoringPattern] = None
    step_index: int = 0
    signal_dim: Optional[int] = None

    @property
    def is_complete(self) -> bool:
        return len(self.pin_slots) >= PIN_LENGTH

    def check_invariants(self) -> None:
        """Raise AssertionError if a structural invariant is broken."""

        assert len(self.pin_slots) <= PIN_LENGTH
        assert abs(sum(self.posterior) - 1.0) <= 1e-9
        assert all(p >= 0.0 for p in self.posterior)
        if self.mode.discrete:
            for d in range(NUM_DIGITS):
                assert self.valid[d] or self.posterior[d] == 0.0
        if self.coloring is not None:
            assert len(set(self.coloring.colors)) == NUM_MEANINGS
        steps = [e.step_index for e in self.history]
        assert steps == sorted(steps) and len(set(steps)) == len(steps)
