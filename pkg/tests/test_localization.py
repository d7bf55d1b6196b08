from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from oracle import mu_B
from wallcross.localization import (
    FINF,
    F0,
    FJ,
    assemble_J_function,
    check_genus0_resummation,
    check_residue,
    enumerate_fixed_points,
    geometric_kernel,
    laurent_residue_identity,
    localization_ring,
    node_data,
    residue_relation,
)
from wallcross.model import ModelSpec, parse_gamma, quintic, r_spin
from wallcross.suite import MODEL_MATRIX

Q = quintic()
R5 = r_spin(5)


def test_node_data_example():
    d = node_data(r_spin(3), (3, 3))
    assert (d.node_ell, d.node_k, d.a_infinity, d.r_prime, d.bundle_shift) == (1, 2, 1, 3, -1)


def test_node_data_k_equals_r_branch():
    # 1 + 4 = 5 = 0*5 + 5 so k = r and c picks up the extra +1
    d = node_data(R5, (5,))
    assert (d.node_ell, d.node_k, d.bundle_shift) == (0, 5, 0)
    # 1 + 2 + 3 + 4 = 10 = 1*5 + 5: one entry equal to r and k = r
    d = node_data(R5, (3, 4, 5))
    assert (d.node_ell, d.node_k, d.a_infinity, d.bundle_shift) == (1, 5, 5, 1)
    d = node_data(R5, (4, 4))
    assert (d.node_ell, d.node_k, d.a_infinity, d.bundle_shift) == (1, 2, 3, 1)


def test_fixed_point_enumeration():
    pts = enumerate_fixed_points(R5, parse_gamma("g=1;|2,2,2"))
    assert [p.label() for p in pts] == ["F0", "Finf", "F_{1,2}", "F_{1,3}", "F_{1,2,3}"]
    g0 = enumerate_fixed_points(R5, parse_gamma("2|2,2"), genus_zero_variant=True)
    assert [p.label() for p in g0] == ["F0", "F_{1,2}"] and g0[1].full
    with pytest.raises(ValueError):
        enumerate_fixed_points(R5, parse_gamma("|2,2,2"))
    with pytest.raises(ValueError):
        enumerate_fixed_points(R5, parse_gamma("g=1;2|"))


@given(st.integers(1, 6), st.integers(0, 2))
def test_fixed_point_counts(n, genus):
    gamma = parse_gamma(f"g={genus};1,1|" + ",".join(["2"] * n))
    pts = enumerate_fixed_points(Q, gamma)
    assert len(pts) == 2 + 2 ** (n - 1) - 1
    assert sum(p.kind == FJ for p in pts) == 2 ** (n - 1) - 1
    assert [p.kind for p in pts[:2]] == [F0, FINF]


def test_geometric_kernel_expansion():
    ring = localization_ring(R5, 0, 3)
    k = geometric_kernel(ring, "psi_x")
    for j in range(4):
        assert k.coefficient({"psi_x": j, "z": -j - 1}) == 1
    assert len(k) == 4


def test_laurent_identity_trivial_case():
    lhs, rhs = laurent_residue_identity(R5, (2, 2), 0)
    assert lhs.is_zero and rhs.is_zero


def test_laurent_identity_quintic_example():
    lhs, rhs = laurent_residue_identity(Q, (5, 5, 3), 2)
    assert lhs == rhs
    assert rhs.coefficient({"psi_x": 10}) == Fraction(7776, 9765625)


@given(st.sampled_from(MODEL_MATRIX), st.data())
def test_laurent_identity_matches_closed_form(model, data):
    values = data.draw(st.lists(st.integers(1, model.r), min_size=1, max_size=5))
    d = data.draw(st.integers(0, 4))
    lhs, rhs = laurent_residue_identity(model, values, d)
    assert lhs == rhs
    # closed form: mu_J is a monomial c z^e, so [z^d mu_J(-z)]_+ = c (-1)^e psi^(d+e) when d+e >= 0
    mono = mu_B(model.r, model.weights, values)
    c, e = mono.as_coeff_exponent(sympy.Symbol("z"))
    if d + e < 0:
        assert rhs.is_zero
    else:
        coeff = rhs.coefficient({"psi_x": int(d + e)})
        assert sympy.Rational(coeff.numerator, coeff.denominator) == c * sympy.Integer(-1) ** e


@given(st.sampled_from(MODEL_MATRIX), st.data())
def test_node_invariants(model, data):
    values = data.draw(st.lists(st.integers(1, model.r), min_size=1, max_size=7))
    d = node_data(model, values)
    r, k, ell = model.r, d.node_k, d.node_ell
    assert r * ell + k == 1 + sum(b - 1 for b in values)
    assert 1 <= k <= r and ell >= 0
    assert (d.a_infinity + k) % r == 0 and 1 <= d.a_infinity <= r
    assert (d.r_prime * k) % r == 0 and r % d.r_prime == 0
    assert d.bundle_shift == ell - values.count(r) + (k == r)


@pytest.mark.parametrize(
    "model,gamma,d",
    [
        (Q, "g=1;|2,2,2,2,2", None),
        (Q, "g=1;|2,2,2,2,2", [1, 0, 2, 0, 0]),
        (R5, "g=2;3|2,4,5", [0, 1, 1]),
        (ModelSpec(6, (1, 2, 3)), "g=1;2,5|3,3", [2, 0]),
        (r_spin(3), "g=0;1,1|2,3,3,1", None),
    ],
)
def test_residue_relation(model, gamma, d):
    rep = check_residue(model, parse_gamma(gamma, model.r), d)
    assert rep.ok, rep.to_json()


def test_twisted_residue_relation():
    rep = check_residue(Q, parse_gamma("g=1;2|2,2,3"), [1, 0, 0], twisted=True)
    assert rep.ok, rep.to_json()


def test_residue_relation_structure():
    rel = residue_relation(Q, parse_gamma("g=1;|2,2,2,2,2"))
    tags = [t.tag for t in rel.terms]
    assert tags[:2] == ["gamma_prime", "gamma"] and set(tags[2:]) == {"gamma_J"}
    assert rel.terms[0].coefficient == 1 and rel.terms[1].coefficient == -1


def test_genus_zero_relation_example():
    rel = residue_relation(R5, parse_gamma("3|2,2"), genus_zero_variant=True)
    assert rel.rhs == 1
    assert [(t.tag, t.J, t.coefficient) for t in rel.terms] == [("gamma_prime", (1,), 1)]


def test_genus_zero_resummation():
    rep = check_genus0_resummation(R5, 6)
    assert rep.ok and rep.details["mu_minus_match"], rep.mismatches


def test_genus_zero_negative_control():
    rep = check_genus0_resummation(R5, 4, perturb={(2,): Fraction(1)})
    assert not rep.ok


def test_J_function_at_zero():
    res = assemble_J_function(R5, 0)
    assert res.report.ok
    assert res.resummed.plain.to_text() == "phi1: z"
    assert all(c.is_zero for c in res.resummed.correlators)


def test_J_function_forms_agree():
    res = assemble_J_function(r_spin(3), 4, 1, 1)
    assert res.report.ok, res.report.mismatches
    assert res.report.compared > 0


@given(st.integers(2, 7))
def test_genus_zero_variant_size(n):
    gamma = parse_gamma("2|" + ",".join(["3"] * n))
    assert len(enumerate_fixed_points(R5, gamma, genus_zero_variant=True)) == 2 ** (n - 1)


def test_twisted_relation_degenerates():
    from wallcross.series import substitute

    gamma = parse_gamma("g=1;2|2,2,3")
    twisted = residue_relation(Q, gamma, [1, 0, 0], twisted=True)
    plain = residue_relation(Q, gamma, [1, 0, 0])
    for a, b in zip(twisted.terms, plain.terms, strict=True):
        c = a.coefficient
        for alpha in range(1, Q.s + 1):
            c = substitute(c, f"lam{alpha}", c.ring.zero())
        assert a.label == b.label
        assert c.to_json() == b.coefficient.to_json()
