import itertools
import random

import pytest

from selfcal.core import (
    NUM_DIGITS,
    ButtonPress,
    ColoringPattern,
    ContinuousSignal,
    EngineConfig,
    InteractionEvent,
    InvalidButtonCount,
    InvalidConfig,
    Meaning,
    Mode,
    NoValidHypothesis,
    admissible_button_colorings,
)
from selfcal.engine import new_session, session_from_dict, session_to_dict, step
from selfcal.simulator import half_plane_user, user_action


def test_meaning_is_binary():
    assert {m for m in Meaning} == {Meaning.YELLOW, Meaning.GREY}
    assert Meaning.YELLOW.other() is Meaning.GREY
    assert Meaning.GREY.other() is Meaning.YELLOW


def test_button_press_validation():
    assert ButtonPress(3).button == 3
    with pytest.raises(ValueError):
        ButtonPress(-1)


def test_continuous_signal_validation():
    sig = ContinuousSignal((0.5, 1.5))
    assert sig.dim == 2
    with pytest.raises(ValueError):
        ContinuousSignal(())
    with pytest.raises(ValueError):
        ContinuousSignal((float("nan"), 0.0))
    with pytest.raises(ValueError):
        ContinuousSignal((float("inf"),))


def test_coloring_pattern_validation():
    colors = tuple(
        Meaning.YELLOW if d < 5 else Meaning.GREY for d in range(NUM_DIGITS)
    )
    pattern = ColoringPattern(colors)
    assert pattern[0] is Meaning.YELLOW
    assert pattern.swapped()[0] is Meaning.GREY
    with pytest.raises(ValueError):
        ColoringPattern(colors[:9])
    with pytest.raises(ValueError):
        ColoringPattern((Meaning.YELLOW,) * NUM_DIGITS)


def test_interaction_event_validation():
    colors = ColoringPattern(
        tuple(Meaning.YELLOW if d % 2 else Meaning.GREY for d in range(NUM_DIGITS))
    )
    with pytest.raises(ValueError):
        InteractionEvent(ButtonPress(0), colors, -1)


@pytest.mark.parametrize(
    "field,value",
    [
        ("decision_margin", 0.0),
        ("decision_margin", 1.0),
        ("consecutive_steps", 0),
        ("min_points", 0),
        ("svm_c", 0.0),
        ("rbf_gamma", -1.0),
        ("rbf_gamma", "mean"),
        ("cv_folds", 1),
        ("posterior_sharpness", 0.0),
    ],
)
def test_config_rejects_bad_values(field, value):
    cfg = EngineConfig(**{field: value})
    with pytest.raises(InvalidConfig):
        cfg.validate()


def test_config_roundtrip():
    cfg = EngineConfig(decision_margin=0.3, rbf_gamma=2.5)
    assert EngineConfig.from_dict(cfg.to_dict()) == cfg


def test_admissible_colorings_matches_enumeration():
    # Independent oracle: enumerate every assignment and keep those using
    # both colors.
    for b in range(1, 11):
        count = sum(
            1
            for combo in itertools.product((0, 1), repeat=b)
            if len(set(combo)) == 2
        )
        assert admissible_button_colorings(b) == count
    assert admissible_button_colorings(9) == 510
    with pytest.raises(InvalidButtonCount):
        admissible_button_colorings(0)


def test_new_session_uniform_start():
    session = new_session(Mode.FREE_BUTTONS, button_count=9, seed=7)
    assert session.posterior == [0.1] * NUM_DIGITS
    assert session.valid == [True] * NUM_DIGITS
    assert session.history == []


def test_new_session_known_mode_coloring_has_both_colors():
    session = new_session(Mode.KNOWN_BUTTONS, button_count=2, seed=1)
    present = set(session.coloring.colors)
    assert present == {Meaning.YELLOW, Meaning.GREY}


def test_new_session_rejects_single_button():
    # One button cannot express both meanings.
    with pytest.raises(InvalidButtonCount):
        new_session(Mode.FREE_BUTTONS, button_count=1, seed=0)


def test_session_serialization_bit_identical():
    user = half_plane_user(pin=(1, 2, 3, 4), seed=5)
    session = new_session(Mode.TOUCH, seed=5)
    for _ in range(7):
        action = user_action(user, session.coloring, 1)
        session, _ = step(session, action)
    restored = session_from_dict(session_to_dict(session))
    assert restored.posterior == session.posterior
    assert restored.scores == session.scores
    assert restored.history == session.history
    assert restored.shared_prior == session.shared_prior
    assert restored.coloring == session.coloring
    # The restored session continues identically, RNG state included.
    action = user_action(user, session.coloring, 1)
    cont_a, _ = step(session, action)
    cont_b, _ = step(restored, action)
    assert cont_a.posterior == cont_b.posterior
    assert cont_a.coloring == cont_b.coloring


def test_random_operation_sequences_keep_invariants():
    rng = random.Random(0)
    for trial in range(12):
        mode = rng.choice([Mode.KNOWN_BUTTONS, Mode.FREE_BUTTONS, Mode.TOUCH])
        buttons = rng.randrange(2, 10) if mode.discrete else None
        session = new_session(mode, button_count=buttons, seed=trial)
        session.check_invariants()
        for _ in range(rng.randrange(2, 9)):
            if session.is_complete:
                break
            if mode.discrete:
                action = ButtonPress(rng.randrange(buttons))
            else:
                action = ContinuousSignal((rng.random(), rng.random()))
            try:
                session, _ = step(session, action)
            except NoValidHypothesis:
                break  # random discrete clicks may wipe every hypothesis
            session.check_invariants()
