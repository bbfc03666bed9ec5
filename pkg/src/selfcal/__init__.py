"""Self-calibrating PIN entry: infer the digit and the user's action
vocabulary at the same time, with no calibration phase."""

from .core import (
    NUM_DIGITS,
    PIN_LENGTH,
    ActionSignal,
    ButtonPress,
    ColoringPattern,
    ContinuousSignal,
    EngineConfig,
    HypothesisDataset,
    InteractionEvent,
    LabeledSignal,
    Meaning,
    Mode,
    ProjectionKind,
    Provenance,
    SessionState,
    admissible_button_colorings,
)
from .engine import (
    Decision,
    decide,
    discrete_consistent,
    elimination_step,
    hypothesis_dataset,
    new_session,
    next_coloring,
    propagate_labels,
    step,
)

__all__ = [
    "NUM_DIGITS",
    "PIN_LENGTH",
    "ActionSignal",
    "ButtonPress",
    "ColoringPattern",
    "ContinuousSignal",
    "EngineConfig",
    "HypothesisDataset",
    "InteractionEvent",
    "LabeledSignal",
    "Meaning",
    "Mode",
    "ProjectionKind",
    "Provenance",
    "SessionState",
    "admissible_button_colorings",
    "Decision",
    "decide",
    "discrete_consistent",
    "elimination_step",
    "hypothesis_dataset",
    "new_session",
    "next_coloring",
    "propagate_labels",
    "step",
]
