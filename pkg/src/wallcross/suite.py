"""The acceptance suite: one function per criterion, each returning a CheckReport."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction

from .correlator import CheckReport, check_dilaton_closed_form, check_wallcrossing_identity
from .localization import assemble_J_function, check_genus0_resummation, laurent_residue_identity, node_data
from .model import (
    GammaType,
    ModelSpec,
    canonical_state,
    epsilon_gamma,
    quintic,
    r_spin,
    selection_rule,
    virtual_dimension,
)
from .mu import mu_coefficient, mu_ring, mu_series, mu_series_by_sequences, sequence_data
from .series import substitute

MODEL_MATRIX = (
    ModelSpec(2, (1,)),
    ModelSpec(2, (1, 1)),
    ModelSpec(2, (1, 1, 1, 1)),
    ModelSpec(3, (1,)),
    ModelSpec(3, (1, 1, 1)),
    ModelSpec(5, (1,)),
    quintic(),
    ModelSpec(6, (1,)),
    ModelSpec(6, (2, 3)),
    ModelSpec(6, (1, 2, 3)),
)

DEFAULT_SEED = 20240229


def _label(model: ModelSpec) -> str:
    return f"r={model.r};w={','.join(map(str, model.weights))}"


def mu_aggregation(models=(quintic(), r_spin(5)), max_degree: int = 5) -> CheckReport:
    """Multiset aggregation equals the ordered-sequence expansion."""
    mismatches, compared = [], 0
    for model in models:
        ring = mu_ring(model, max_degree)
        fast = mu_series(model, ring)
        slow = mu_series_by_sequences(model, ring)
        compared += sum(len(c) for c in slow.components)
        if fast != slow:
            mismatches.append({"model": _label(model)})
    return CheckReport("mu-aggregation", not mismatches, compared, mismatches, {"max_degree": max_degree})


def mu_single_entry(models=MODEL_MATRIX) -> CheckReport:
    mismatches, compared = [], 0
    for model in models:
        for b in range(1, model.r + 1):
            compared += 1
            value = mu_coefficient(model, (b,))
            if value != 1:
                mismatches.append({"model": _label(model), "b": b, "value": value.to_text()})
    return CheckReport("mu-single-entry", not mismatches, compared, mismatches)


def wallcross_suite(
    models=(quintic(), r_spin(5)),
    genera=(0, 1, 2, 3),
    t_degree: int = 6,
    u_degree: int = 2,
    psi_degree: int = 3,
) -> CheckReport:
    """Every (model, genus) must pass and a perturbed mu coefficient must be caught."""
    runs, ok = [], True
    compared = 0
    for model in models:
        for g in genera:
            rep = check_wallcrossing_identity(model, g, t_degree, u_degree, psi_degree)
            ok &= rep.ok
            compared += rep.compared
            runs.append({"model": _label(model), "genus": g, "ok": rep.ok, "compared": rep.compared})
    control_model = models[-1]
    control = check_wallcrossing_identity(
        control_model, 2, t_degree, u_degree, psi_degree, perturb={(2, 2, 2, 2, 2): Fraction(1), (2,): Fraction(1)}
    )
    ok &= not control.ok
    details = {
        "runs": runs,
        "negative_control": {"model": _label(control_model), "detected": not control.ok},
        "bounds": {"t": t_degree, "u": u_degree, "psi": psi_degree},
    }
    return CheckReport("wallcross", ok, compared, [], details)


def dilaton_suite(model: ModelSpec = quintic(), genera=(1, 2, 3), t_degree: int = 10) -> CheckReport:
    ok, compared, runs = True, 0, []
    for g in genera:
        rep = check_dilaton_closed_form(model, g, t_degree)
        ok &= rep.ok
        compared += rep.compared
        runs.append({"genus": g, "ok": rep.ok, **{k: v for k, v in rep.details.items() if k not in ("model", "genus")}})
    return CheckReport("dilaton", ok, compared, [], {"runs": runs})


def residue_suite(models=MODEL_MATRIX, max_size: int = 5, max_d: int = 4) -> CheckReport:
    """z^{-1} extraction equals truncation-then-evaluation for every J-multiset and descendant power."""
    mismatches, cases = [], 0
    for model in models:
        for size in range(1, max_size + 1):
            for values in itertools.combinations_with_replacement(range(1, model.r + 1), size):
                for d in range(max_d + 1):
                    cases += 1
                    lhs, rhs = laurent_residue_identity(model, values, d)
                    if lhs != rhs:
                        mismatches.append({"model": _label(model), "J": list(values), "d": d})
    return CheckReport("residue", not mismatches and cases >= 500, cases, mismatches[:5])


def genus0_suite(max_r: int = 5, t_degree: int = 5, u_degree: int = 2, psi_degree: int = 1) -> CheckReport:
    ok, compared, runs = True, 0, []
    for model in MODEL_MATRIX:
        if model.r > max_r:
            continue
        g0 = check_genus0_resummation(model, t_degree)
        jf = assemble_J_function(model, t_degree, u_degree, psi_degree).report
        ok &= g0.ok and jf.ok
        compared += g0.compared + jf.compared
        runs.append({"model": _label(model), "genus0": g0.ok, "jfunc": jf.ok})
    return CheckReport("genus0-jfunc", ok, compared, [], {"runs": runs})


def random_gamma(rng: random.Random, model: ModelSpec) -> GammaType:
    """A random insertion profile satisfying the selection rule (last entry adjusted)."""
    while True:
        genus = rng.randint(0, 3)
        m = rng.randint(0, 3)
        n = rng.randint(0, 4)
        if m + n == 0:
            continue
        entries = [rng.randint(1, model.r) for _ in range(m + n)]
        total = 2 * genus - 2 + sum(1 - x for x in entries[:-1])
        entries[-1] = canonical_state(total + 1, model.r)
        gamma = GammaType(tuple(entries[:m]), tuple(entries[m:]), genus)
        if selection_rule(model, gamma):
            return gamma


def scalar_suite(seed: int = DEFAULT_SEED, count: int = 240) -> CheckReport:
    rng = random.Random(seed)
    mismatches, k_equals_r = [], 0
    for i in range(count):
        model = MODEL_MATRIX[i % len(MODEL_MATRIX)]
        gamma = random_gamma(rng, model)
        problems = []
        d0 = virtual_dimension(model, gamma)
        d1 = virtual_dimension(model, gamma, master=True)
        if d1 - d0 != 1 or d0.denominator != 1:
            problems.append("virtual dimension")
        eps = epsilon_gamma(model, gamma)
        if eps * eps != Fraction(model.r) ** (2 - 2 * gamma.genus):
            problems.append("epsilon square")
        values = [rng.randint(1, model.r) for _ in range(rng.randint(1, 5))]
        datum = node_data(model, values)
        r, k, ell = model.r, datum.node_k, datum.node_ell
        if r * ell + k != 1 + sum(b - 1 for b in values) or not 1 <= k <= r or ell < 0:
            problems.append("r*ell + k")
        if (datum.a_infinity + k) % r or not 1 <= datum.a_infinity <= r:
            problems.append("a_infinity")
        if r % datum.r_prime or datum.r_prime != r // math.gcd(r, k):
            problems.append("r_prime")
        expected_c = ell - values.count(r) + (1 if k == r else 0)
        k_equals_r += k == r
        if datum.bundle_shift != expected_c:
            problems.append("bundle shift")
        if gamma.n:
            J = gamma.light
            gamma_J = GammaType(gamma.heavy + (node_data(model, J).node_k,), (), gamma.genus)
            sign = (-1) ** (sum(sequence_data(model, J).ell) % 2)
            if eps != sign * epsilon_gamma(model, gamma_J):
                problems.append("epsilon relation")
        if problems:
            mismatches.append({"model": _label(model), "gamma": str(gamma), "values": values, "problems": problems})
    return CheckReport(
        "scalar", not mismatches, count, mismatches[:5], {"seed": seed, "k_equals_r_cases": k_equals_r}
    )


def twisted_suite(models=MODEL_MATRIX, max_size: int = 4) -> CheckReport:
    mismatches, cases = [], 0
    for model in models:
        ring = mu_ring(model, max_size, variables=(), twisted=True)
        zero = ring.zero()
        for size in range(1, max_size + 1):
            for values in itertools.combinations_with_replacement(range(1, model.r + 1), size):
                cases += 1
                twisted = mu_coefficient(model, values, twisted=True, ring=ring)
                for alpha in range(1, model.s + 1):
                    twisted = substitute(twisted, f"lam{alpha}", zero)
                if twisted != mu_coefficient(model, values, ring=ring):
                    mismatches.append({"model": _label(model), "J": list(values)})
    return CheckReport("twisted", not mismatches, cases, mismatches[:5])


CRITERIA = (
    ("1 mu-series aggregation", mu_aggregation),
    ("2 mu of a single entry", mu_single_entry),
    ("3 wall-crossing identity", wallcross_suite),
    ("4 dilaton closed form", dilaton_suite),
    ("5 residue Laurent identity", residue_suite),
    ("6 genus-zero resummation and J-function", genus0_suite),
    ("7 scalar formulas", scalar_suite),
    ("8 twisted degeneration", twisted_suite),
)


def run_criterion(index: int, seed: int = DEFAULT_SEED) -> tuple[str, CheckReport]:
    name, fn = CRITERIA[index]
    return name, fn(seed=seed) if fn is scalar_suite else fn()
