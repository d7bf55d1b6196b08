from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wallcross.model import (
    GammaType,
    InconsistentGammaError,
    ModelError,
    ModelSpec,
    StateKind,
    classify_state,
    dual_state,
    epsilon_gamma,
    parse_gamma,
    quintic,
    r_spin,
    selection_rule,
    virtual_dimension,
)
from wallcross.suite import MODEL_MATRIX

Q = quintic()


def test_model_validation():
    assert Q.q == 1 and Q.is_calabi_yau
    assert r_spin(5).q == Fraction(1, 5)
    for bad in ((1, (1,)), (6, (4,)), (4, (2, 2)), (5, ()), (6, (6,))):
        with pytest.raises(ModelError):
            ModelSpec(*bad)


def test_model_loading(tmp_path):
    js = tmp_path / "m.json"
    js.write_text(json.dumps({"r": 6, "weights": [2, 3]}))
    toml = tmp_path / "m.toml"
    toml.write_text("r = 6\nweights = [2, 3]\n")
    assert ModelSpec.load(js) == ModelSpec.load(toml) == ModelSpec(6, (2, 3))
    bad = tmp_path / "bad.json"
    bad.write_text('{"r": 6}')
    with pytest.raises(ModelError):
        ModelSpec.load(bad)


def test_gamma_parsing():
    g = parse_gamma("g=1;|2,2,2,2,2")
    assert (g.genus, g.heavy, g.light) == (1, (), (2,) * 5)
    g = parse_gamma("3,4|", 5)
    assert (g.genus, g.heavy, g.light) == (0, (3, 4), ())
    assert parse_gamma(str(g)) == g
    for bad in ("1,2", "g=1|2", "g=x;|2"):
        with pytest.raises(ValueError):
            parse_gamma(bad)


def test_selection_rule_examples():
    assert not selection_rule(Q, GammaType((), (2,), 1))
    assert selection_rule(r_spin(5), GammaType((2,), (2, 2), 0))
    for model in MODEL_MATRIX:
        assert selection_rule(model, GammaType((1, 1), (1,), 1))


def test_virtual_dimension_examples():
    g = parse_gamma("g=1;|2,2,2,2,2")
    assert virtual_dimension(Q, g) == 0
    assert virtual_dimension(Q, g, master=True) == 1
    for model in MODEL_MATRIX:
        assert virtual_dimension(model, GammaType((1, 1, 1), (), 1)) == 3


def test_epsilon_examples():
    assert epsilon_gamma(Q, parse_gamma("g=1;|2,2,2,2,2")) == -1
    for model in MODEL_MATRIX:
        assert epsilon_gamma(model, GammaType((1,), (1, 1), 1)) == 1
    with pytest.raises(InconsistentGammaError):
        epsilon_gamma(r_spin(5), GammaType((2, 2, 4), (), 0))


def test_classification_examples():
    assert classify_state(Q, 5) is StateKind.BROAD
    assert classify_state(Q, 2) is StateKind.NARROW
    for model in MODEL_MATRIX:
        assert classify_state(model, model.r) is StateKind.BROAD
    with pytest.raises(ValueError):
        classify_state(Q, 0)


# -- properties -----------------------------------------------------------------

models = st.sampled_from(MODEL_MATRIX)


@st.composite
def model_and_gamma(draw, valid=True):
    model = draw(models)
    states = st.integers(1, model.r)
    genus = draw(st.integers(0, 3))
    heavy = draw(st.lists(states, max_size=4))
    light = draw(st.lists(states, max_size=4))
    gamma = GammaType(tuple(heavy), tuple(light), genus)
    if valid and not selection_rule(model, gamma):
        # fix the last entry so the rule holds
        total = 2 * genus - 2 + sum(1 - x for x in heavy + light[:-1])
        fix = (total + 1 - 1) % model.r + 1
        light = light[:-1] + [fix]
        gamma = GammaType(tuple(heavy), tuple(light), genus)
    return model, gamma


@given(model_and_gamma(valid=False), st.randoms())
def test_selection_rule_is_permutation_invariant(mg, rnd):
    model, gamma = mg
    heavy, light = list(gamma.heavy), list(gamma.light)
    rnd.shuffle(heavy)
    rnd.shuffle(light)
    assert selection_rule(model, gamma) == selection_rule(model, GammaType(tuple(heavy), tuple(light), gamma.genus))


@given(model_and_gamma())
def test_virtual_dimension_is_integral_under_the_selection_rule(mg):
    model, gamma = mg
    assert selection_rule(model, gamma)
    d = virtual_dimension(model, gamma)
    assert d.denominator == 1
    assert virtual_dimension(model, gamma, master=True) == d + 1


@given(model_and_gamma())
def test_epsilon_squares_to_a_power_of_r(mg):
    model, gamma = mg
    eps = epsilon_gamma(model, gamma)
    assert eps * eps == Fraction(model.r) ** (2 - 2 * gamma.genus)


@given(models, st.data())
def test_classification_is_symmetric_under_duality(model, data):
    a = data.draw(st.integers(1, model.r - 1))
    assert classify_state(model, a) is classify_state(model, dual_state(a, model.r))
    assert (a + dual_state(a, model.r)) % model.r == 0
