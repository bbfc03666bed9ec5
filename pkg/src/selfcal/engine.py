"""The inference core: hypothesis labeling, consistency filtering, decisions.

The trick is to never interpret an action directly.  Each of the 10 digits
is treated as a hypothetical intent; under each hypothesis every recorded
action inherits the color that digit had when the action was made.  A
hypothesis survives while its implied labeling stays consistent: for
buttons, no button carries two colors; for continuous signals, the labeling
admits an accurate cross-validated classifier.  Once one digit stands out,
its labels become shared ground truth for all hypotheses and the next digit
starts from that richer prior.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .consistency import consistency_score_xy
from .core import (
    NUM_DIGITS,
    PIN_LENGTH,
    ActionSignal,
    ButtonPress,
    ColoringPattern,
    ContinuousSignal,
    DimensionMismatch,
    EngineConfig,
    HypothesisDataset,
    InteractionEvent,
    InvalidButtonCount,
    InvalidConfig,
    LabeledSignal,
    Meaning,
    MixedSignalKinds,
    Mode,
    NoValidHypothesis,
    Provenance,
    ProjectionKind,
    SessionComplete,
    SessionState,
)
from .signals import AUDIO_WINDOW_COUNT, project_2d


@dataclass(frozen=True)
class Decision:
    """Emitted when one digit hypothesis clearly wins."""

    digit: int
    step_decided: int
    scores_at_decision: tuple[float, ...]


def default_known_colors(button_count: int) -> tuple[Meaning, ...]:
    """Factory coloring for pre-labeled buttons: alternating, starting yellow."""

    return tuple(
        Meaning.YELLOW if b % 2 == 0 else Meaning.GREY for b in range(button_count)
    )


def new_session(
    mode: Mode,
    button_count: Optional[int] = None,
    seed: int = 0,
    config: Optional[EngineConfig] = None,
    known_colors: Optional[Sequence[Meaning]] = None,
) -> SessionState:
    """Create a fresh session: uniform posterior, all digits valid.

    Button modes need at least two buttons: with a single button both
    meanings would collapse onto the same action and could never be told
    apart.  In the known-buttons mode the button colors are injected into
    the shared prior as settled labels, which is exactly what makes plain
    elimination a special case of the hypothesis machinery.
    """

    config = config if config is not None else EngineConfig()
    config.validate()
    if mode.discrete:
        if button_count is None or button_count < 2:
            raise InvalidButtonCount("button modes need button_count >= 2")
    else:
        button_count = None
    session = SessionState(
        mode=mode,
        config=config,
        rng_seed=seed,
        rng=random.Random(seed),
        button_count=button_count,
    )
    if mode is Mode.KNOWN_BUTTONS:
        colors = (
            tuple(known_colors)
            if known_colors is not None
            else default_known_colors(button_count)
        )
        if len(colors) != button_count:
            raise InvalidConfig("known_colors must cover every button")
        if len(set(colors)) < 2:
            raise InvalidConfig("known_colors must use both colors")
        session.known_colors = colors
        session.shared_prior = [
            LabeledSignal(ButtonPress(b), colors[b], Provenance.PROPAGATED)
            for b in range(button_count)
        ]
    session.coloring = next_coloring(session.valid, session.rng)
    return session


def hypothesis_dataset(
    history: Sequence[InteractionEvent],
    shared_prior: Sequence[LabeledSignal],
    intent: int,
) -> HypothesisDataset:
    """Label the action history as if ``intent`` were the digit being typed.

    Settled prior labels are copied unchanged; each event contributes its
    action labeled with the color ``intent`` wore when the action happened.
    """

    items = list(shared_prior)
    for event in history:
        items.append(
            LabeledSignal(event.action, event.coloring[intent], Provenance.HYPOTHETICAL)
        )
    return HypothesisDataset(intent=intent, items=items)


def discrete_consistent(dataset: HypothesisDataset) -> bool:
    """True iff no button in the dataset carries both colors."""

    seen: dict[int, Meaning] = {}
    for item in dataset.items:
        if not isinstance(item.action, ButtonPress):
            raise MixedSignalKinds("discrete consistency applies to button actions only")
        previous = seen.setdefault(item.action.button, item.label)
        if previous is not item.label:
            return False
    return True


def elimination_step(
    valid: Sequence[bool], coloring: ColoringPattern, meaning: Meaning
) -> list[bool]:
    """Keep only still-valid digits whose displayed color matches the meaning."""

    return [v and coloring[d] is meaning for d, v in enumerate(valid)]


def next_coloring(valid: Sequence[bool], rng: random.Random) -> ColoringPattern:
    """Draw the next digit coloring.

    Valid digits are split as evenly as possible between the two colors,
    uniformly over balanced partitions, so any two still-valid digits get
    separated with constant probability per step and the interaction can
    always make progress.  Invalid digits are colored by coin flip.
    """

    valid_digits = [d for d in range(NUM_DIGITS) if valid[d]]
    if not valid_digits:
        raise NoValidHypothesis("cannot color with every digit eliminated")
    while True:
        colors: list[Optional[Meaning]] = [None] * NUM_DIGITS
        k = len(valid_digits)
        if k >= 2:
            n_yellow = k // 2 + (rng.getrandbits(1) if k % 2 else 0)
            yellow_set = set(rng.sample(valid_digits, n_yellow))
            for d in valid_digits:
                colors[d] = Meaning.YELLOW if d in yellow_set else Meaning.GREY
        else:
            colors[valid_digits[0]] = (
                Meaning.YELLOW if rng.getrandbits(1) else Meaning.GREY
            )
        for d in range(NUM_DIGITS):
            if colors[d] is None:
                colors[d] = Meaning.YELLOW if rng.getrandbits(1) else Meaning.GREY
        if len(set(colors)) == 2:
            return ColoringPattern(tuple(colors))


def _margin_holder(
    scores: Sequence[float], valid: Sequence[bool], margin: float
) -> Optional[int]:
    best_d, best, second = -1, -math.inf, -math.inf
    for d in range(NUM_DIGITS):
        if not valid[d]:
            continue
        s = scores[d]
        if s > best:
            best_d, best, second = d, s, best
        elif s > second:
            second = s
    if best_d < 0:
        return None
    if second == -math.inf or best - second >= margin:
        return best_d
    return None


def decide(
    score_history: Sequence[Sequence[float]],
    valid: Sequence[bool],
    history_len: int,
    config: EngineConfig,
    discrete: bool,
) -> Optional[int]:
    """Apply the decision rule to the per-step scores since the last decision.

    Discrete sessions decide by exact elimination: exactly one digit left.
    Continuous sessions decide digit d once at least ``min_points`` actions
    were seen and d's score beat the best other valid digit by
    ``decision_margin`` on each of the last ``consecutive_steps`` steps.
    """

    if not any(valid):
        raise NoValidHypothesis("all digit hypotheses eliminated")
    if discrete:
        remaining = [d for d in range(NUM_DIGITS) if valid[d]]
        return remaining[0] if len(remaining) == 1 else None
    if history_len < config.min_points:
        return None
    if len(score_history) < config.consecutive_steps:
        return None
    candidate: Optional[int] = None
    for row in list(score_history)[-config.consecutive_steps :]:
        holder = _margin_holder(row, valid, config.decision_margin)
        if holder is None or (candidate is not None and holder != candidate):
            return None
        candidate = holder
    return candidate


def propagate_labels(session: SessionState, decision: Decision) -> SessionState:
    """Adopt the winning hypothesis's labels as shared ground truth.

    The labels of the decided digit become settled prior entries for every
    hypothesis, the per-digit history is cleared, and all hypotheses restart
    equal: immediately afterwards the ten hypothesis datasets are identical.
    """

    if not session.valid[decision.digit]:
        raise ValueError("decided digit was not a valid hypothesis")
    if not session.history:
        raise ValueError("a decision requires at least one recorded event")
    for event in session.history:
        session.shared_prior.append(
            LabeledSignal(
                event.action, event.coloring[decision.digit], Provenance.PROPAGATED
            )
        )
    session.history.clear()
    session.score_history.clear()
    session.valid = [True] * NUM_DIGITS
    session.scores = [1.0] * NUM_DIGITS
    session.posterior = [1.0 / NUM_DIGITS] * NUM_DIGITS
    return session


def scoring_points(session: SessionState) -> np.ndarray:
    """Point coordinates the classifier sees: one row per prior+history item.

    Touch points are used as-is.  Sketch features and audio window
    embeddings are re-projected to 2-D from scratch on every call, so the
    projection always reflects all data collected so far.  Sessions
    configured for an external projection are expected to receive already
    2-D signals.
    """

    feats = [ls.action.features for ls in session.shared_prior] + [
        ev.action.features for ev in session.history
    ]
    X = np.array(feats, dtype=np.float64)
    if session.mode is Mode.TOUCH:
        return X
    if session.config.projection is ProjectionKind.EXTERNAL_2D:
        if X.shape[1] != 2:
            raise DimensionMismatch(
                "externally projected sessions must receive 2-D signals"
            )
        return X
    if session.mode is Mode.SKETCH:
        return project_2d(X)
    # Audio: rows are flattened (windows x embedding) blocks per clip.
    n = X.shape[0]
    emb_dim = X.shape[1] // AUDIO_WINDOW_COUNT
    windows = X.reshape(n * AUDIO_WINDOW_COUNT, emb_dim)
    projected = project_2d(windows)
    return projected.reshape(n, AUDIO_WINDOW_COUNT, 2).mean(axis=1)


def hypothesis_label_rows(session: SessionState) -> list[list[Meaning]]:
    """Per-digit label sequences aligned with ``scoring_points`` rows."""

    prior = [ls.label for ls in session.shared_prior]
    return [
        prior + [ev.coloring[d] for ev in session.history] for d in range(NUM_DIGITS)
    ]


def _continuous_scores(session: SessionState) -> list[float]:
    # Shared prior labels are settled ground truth: they stay in training
    # and are never held out, so the score reflects the points that can
    # still tell hypotheses apart and later digits keep deciding quickly as
    # the prior grows.
    points = scoring_points(session)
    rows = hypothesis_label_rows(session)
    n_settled = len(session.shared_prior)
    cache: dict[tuple[int, ...], float] = {}
    scores = []
    for labels in rows:
        bits = tuple(1 if m is Meaning.YELLOW else 0 for m in labels)
        flipped = tuple(1 - b for b in bits)
        key = min(bits, flipped)  # scoring is label-swap invariant
        if key not in cache:
            cache[key] = consistency_score_xy(
                points, labels, session.config, n_settled=n_settled
            )
        scores.append(cache[key])
    return scores


def _posterior(
    scores: Sequence[float], valid: Sequence[bool], sharpness: float
) -> list[float]:
    """Display-only softmax over valid digits; never drives decisions."""

    active = [sharpness * s for s, v in zip(scores, valid) if v]
    peak = max(active)
    weights = [
        math.exp(sharpness * s - peak) if v else 0.0 for s, v in zip(scores, valid)
    ]
    total = sum(weights)
    return [w / total for w in weights]


def _check_action(session: SessionState, action: ActionSignal) -> None:
    if session.mode.discrete:
        if not isinstance(action, ButtonPress):
            raise MixedSignalKinds(f"{session.mode.value} mode takes button presses")
        if action.button >= session.button_count:
            raise ValueError(
                f"button {action.button} out of range for {session.button_count} buttons"
            )
        return
    if not isinstance(action, ContinuousSignal):
        raise MixedSignalKinds(f"{session.mode.value} mode takes continuous signals")
    if session.signal_dim is None:
        if session.mode is Mode.AUDIO and action.dim % AUDIO_WINDOW_COUNT != 0:
            raise DimensionMismatch(
                f"audio signals must stack {AUDIO_WINDOW_COUNT} window embeddings"
            )
        session.signal_dim = action.dim
    elif action.dim != session.signal_dim:
        raise DimensionMismatch(
            f"signal dimension {action.dim} != session dimension {session.signal_dim}"
        )


def step(
    session: SessionState, action: ActionSignal
) -> tuple[SessionState, Optional[Decision]]:
    """Record one action, re-evaluate every hypothesis, maybe decide a digit.

    Always ends by drawing the next coloring from the session RNG, so a
    given (seed, action sequence) replays to the identical session.
    """

    if session.is_complete:
        raise SessionComplete("all PIN slots are filled")
    _check_action(session, action)
    event = InteractionEvent(
        action=action, coloring=session.coloring, step_index=session.step_index
    )
    session.history.append(event)
    session.step_index += 1

    if session.mode.discrete:
        valid = [
            discrete_consistent(hypothesis_dataset(session.history, session.shared_prior, d))
            for d in range(NUM_DIGITS)
        ]
        scores = [1.0 if v else 0.0 for v in valid]
    else:
        valid = [True] * NUM_DIGITS
        scores = _continuous_scores(session)
    session.valid = valid
    session.scores = scores
    session.score_history.append(list(scores))
    if not any(valid):
        raise NoValidHypothesis("every digit hypothesis breached consistency")
    session.posterior = _posterior(scores, valid, session.config.posterior_sharpness)

    digit = decide(
        session.score_history,
        valid,
        len(session.history),
        session.config,
        session.mode.discrete,
    )
    decision = None
    if digit is not None:
        decision = Decision(
            digit=digit,
            step_decided=event.step_index,
            scores_at_decision=tuple(scores),
        )
        propagate_labels(session, decision)
        session.pin_slots.append(digit)
    session.coloring = next_coloring(session.valid, session.rng)
    return session, decision


def button_color_map(session: SessionState) -> dict[int, Meaning]:
    """Colors of buttons already settled by propagation (or known upfront)."""

    colors: dict[int, Meaning] = {}
    for item in session.shared_prior:
        if isinstance(item.action, ButtonPress):
            colors.setdefault(item.action.button, item.label)
    return colors


def session_to_dict(session: SessionState) -> dict:
    """JSON-ready snapshot; round-trips bit-identically via ``session_from_dict``."""

    def action_dict(a: ActionSignal) -> dict:
        if isinstance(a, ButtonPress):
            return {"kind": "button", "button": a.button}
        return {"kind": "continuous", "features": list(a.features)}

    def labeled_dict(ls: LabeledSignal) -> dict:
        return {
            "action": action_dict(ls.action),
            "label": ls.label.value,
            "provenance": ls.provenance.value,
        }

    state = session.rng.getstate()
    return {
        "mode": session.mode.value,
        "config": session.config.to_dict(),
        "rng_seed": session.rng_seed,
        "rng_state": [state[0], list(state[1]), state[2]],
        "button_count": session.button_count,
        "known_colors": [c.value for c in session.known_colors]
        if session.known_colors
        else None,
        "pin_slots": list(session.pin_slots),
        "history": [
            {
                "action": action_dict(e.action),
                "coloring": [c.value for c in e.coloring.colors],
                "step_index": e.step_index,
            }
            for e in session.history
        ],
        "shared_prior": [labeled_dict(ls) for ls in session.shared_prior],
        "posterior": list(session.posterior),
        "valid": list(session.valid),
        "scores": list(session.scores),
        "score_history": [list(r) for r in session.score_history],
        "coloring": [c.value for c in session.coloring.colors],
        "step_index": session.step_index,
        "signal_dim": session.signal_dim,
    }


def session_from_dict(data: dict) -> SessionState:
    def action_from(d: dict) -> ActionSignal:
        if d["kind"] == "button":
            return ButtonPress(d["button"])
        return ContinuousSignal(tuple(d["features"]))

    rng = random.Random()
    s0, s1, s2 = data["rng_state"]
    rng.setstate((s0, tuple(s1), s2))
    session = SessionState(
        mode=Mode(data["mode"]),
        config=EngineConfig.from_dict(data["config"]),
        rng_seed=data["rng_seed"],
        rng=rng,
        button_count=data["button_count"],
        known_colors=tuple(Meaning(c) for c in data["known_colors"])
        if data["known_colors"]
        else None,
        pin_slots=list(data["pin_slots"]),
        history=[
            InteractionEvent(
                action=action_from(e["action"]),
                coloring=ColoringPattern(tuple(Meaning(c) for c in e["coloring"])),
                step_index=e["step_index"],
            )
            for e in data["history"]
        ],
        shared_prior=[
            LabeledSignal(
                action=action_from(ls["action"]),
                label=Meaning(ls["label"]),
                provenance=Provenance(ls["provenance"]),
            )
            for ls in data["shared_prior"]
        ],
        posterior=list(data["posterior"]),
        valid=list(data["valid"]),
        scores=list(data["scores"]),
        score_history=[list(r) for r in data["score_history"]],
        coloring=ColoringPattern(tuple(Meaning(c) for c in data["coloring"])),
        step_index=data["step_index"],
        signal_dim=data["signal_dim"],
    )
    return session
