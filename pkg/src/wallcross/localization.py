"""Fixed-point data, Euler-class contributions and the relations they induce.

Only the numerical shadow of the localization computation is modelled: each
fixed component contributes a Laurent series in the equivariant parameter z,
cotangent-line classes are bounded formal generators, and moduli spaces appear
as opaque labels.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .correlator import (
    CheckReport,
    CorrelatorExpr,
    CorrelatorSymbol,
    add_insertions,
    automorphism_order,
    block_insertion,
    compare_exprs,
    correlator_ring,
    expand_F_infinity,
    heavy_insertions,
    light_block_table,
    merge_monomial_keys,
    multisets,
    mu_plus_insertions,
    set_partitions,
    symbol_selection,
    t_variables,
    transfer,
    u_name,
)
from .model import GammaType, ModelSpec, canonical_state, dual_state, epsilon_gamma, selection_rule
from .mu import (
    StateVector,
    mu_coefficient,
    mu_minus,
    mu_plus,
    mu_ring,
    mu_bounds,
    sequence_data,
    split_node,
)
from .series import (
    SeriesRing,
    TruncatedSeries,
    TruncationPolicy,
    laurent_truncate_minus,
    laurent_truncate_plus,
    negate_z,
    substitute,
)

F0, FINF, FJ = "F0", "Finf", "FJ"


@dataclass(frozen=True)
class FixedPointDatum:
    kind: str
    J: tuple[int, ...] = ()
    values: tuple[int, ...] = ()
    node_k: int | None = None
    node_ell: int | None = None
    a_infinity: int | None = None
    r_prime: int | None = None
    bundle_shift: int | None = None
    full: bool = False

    def label(self) -> str:
        if self.kind != FJ:
            return self.kind
        return "F_{" + ",".join(map(str, self.J)) + "}"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "J": list(self.J),
            "values": list(self.values),
            "k": self.node_k,
            "ell": self.node_ell,
            "a_infinity": self.a_infinity,
            "r_prime": self.r_prime,
            "c": self.bundle_shift,
            "full": self.full,
        }


def node_data(model: ModelSpec, values: Sequence[int], J: Sequence[int] | None = None, full: bool = False) -> FixedPointDatum:
    """k, ell, a_infinity, r', c for the light markings in J carrying ``values``."""
    values = tuple(values)
    r = model.r
    for b in values:
        if not 1 <= b <= r:
            raise ValueError(f"entry {b} outside 1..{r}")
    ell, k = split_node(r, values)
    c = ell - sum(1 for b in values if b == r) + (1 if k == r else 0)
    return FixedPointDatum(
        kind=FJ,
        J=tuple(J) if J is not None else tuple(range(1, len(values) + 1)),
        values=values,
        node_k=k,
        node_ell=ell,
        a_infinity=canonical_state(-k, r),
        r_prime=r // math.gcd(r, k),
        bundle_shift=c,
        full=full,
    )


def enumerate_fixed_points(model: ModelSpec, gamma: GammaType, genus_zero_variant: bool = False) -> list[FixedPointDatum]:
    """F0, Finf and one F_J per {1} < J <= {1..n}; the genus-zero variant has no Finf and includes J = {1..n}."""
    gamma.check_range(model.r)
    n = gamma.n
    if n < 1:
        raise ValueError("at least one light marking is required")
    if genus_zero_variant:
        if gamma.genus != 0 or gamma.m != 1 or n < 2:
            raise ValueError("the genus-zero variant needs g = 0, one heavy and at least two light markings")
    elif gamma.euler < 0:
        raise ValueError("2g - 2 + m must be nonnegative")
    out = [FixedPointDatum(F0)]
    if not genus_zero_variant:
        out.append(FixedPointDatum(FINF))
    rest = range(2, n + 1)
    for size in range(1, n):
        for extra in itertools.combinations(rest, size):
            J = (1,) + extra
            values = tuple(gamma.light[j - 1] for j in J)
            out.append(node_data(model, values, J, full=genus_zero_variant and len(J) == n))
    return out


# -- contributions -------------------------------------------------------------


def localization_ring(model: ModelSpec, n_light: int, max_power: int, twisted: bool = False) -> SeriesRing:
    """z, lambdas and psi_x, psi_y1..psi_yn with psi-powers and |z|-powers bounded by ``max_power``."""
    policy = TruncationPolicy(
        z_min=-max_power - n_light - 2,
        z_max=max_power,
        max_lambda_degree=(n_light * model.s if twisted else 0),
    )
    psi = ["psi_x"] + [f"psi_y{j}" for j in range(1, n_light + 1)]
    return SeriesRing.build(policy, z=True, lambdas=model.s if twisted else 0, psi=psi)


def geometric_kernel(ring: SeriesRing, psi: str) -> TruncatedSeries:
    """1/(z - psi) = sum_k psi^k z^(-k-1), within the ring's bounds."""
    return ring.series({ring.monomial_key({psi: k, "z": -k - 1}): 1 for k in range(ring.policy.z_max + 1)})


def mu_at_minus_z(model: ModelSpec, values: Sequence[int], ring: SeriesRing, twisted: bool = False) -> TruncatedSeries:
    return negate_z(mu_coefficient(model, values, twisted=twisted, ring=ring))


def localization_contribution(
    model: ModelSpec, datum: FixedPointDatum, ring: SeriesRing, twisted: bool = False
) -> TruncatedSeries:
    """Inverse equivariant Euler class of the virtual normal bundle of one fixed component.

    F0: 1/(z - psi_y1); Finf: -1/(z - psi_y1); F_J: (-1)^{sum ell} r' mu_J(-z)/(z - psi_x);
    genus-zero full J: (-1)^{sum ell} mu_B(-z).
    """
    if datum.kind == F0:
        return geometric_kernel(ring, "psi_y1")
    if datum.kind == FINF:
        return -geometric_kernel(ring, "psi_y1")
    sign = (-1) ** (sum(sequence_data(model, datum.values).ell) % 2)
    mu = mu_at_minus_z(model, datum.values, ring, twisted).scale(sign)
    if datum.full:
        return mu
    return mu.scale(datum.r_prime) * geometric_kernel(ring, "psi_x")


# -- residue relation ----------------------------------------------------------


@dataclass
class RelationTerm:
    tag: str
    label: GammaType
    coefficient: TruncatedSeries
    J: tuple[int, ...] = ()
    epsilon: Fraction | None = None

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "label": str(self.label),
            "J": list(self.J),
            "epsilon": None if self.epsilon is None else str(self.epsilon),
            "coefficient": self.coefficient.to_text(),
        }


@dataclass
class ResidueRelation:
    """sum(term.coefficient * [term.label]) == rhs, with rhs zero for the standard relation."""

    gamma: GammaType
    terms: list[RelationTerm]
    rhs: Fraction = Fraction(0)
    genus_zero: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "gamma": str(self.gamma),
            "genus_zero": self.genus_zero,
            "terms": [t.to_dict() for t in self.terms],
            "rhs": str(self.rhs),
            "details": self.details,
        }


def _psi_monomial(ring: SeriesRing, d_powers: Sequence[int], skip: Sequence[int] = ()) -> TruncatedSeries:
    return ring.monomial({f"psi_y{j}": d for j, d in enumerate(d_powers, 1) if j not in skip})


def _z_residue(s: TruncatedSeries) -> TruncatedSeries:
    return s.coefficient_in("z", -1)


def _relation_bound(model: ModelSpec, gamma: GammaType, d_powers: Sequence[int]) -> int:
    return sum(d_powers) + max(mu_bounds(model, max(gamma.n, 1))[1], 1) + 1


def truncated_block(
    model: ModelSpec, values: Sequence[int], descendant: int, ring: SeriesRing, twisted: bool = False
) -> TruncatedSeries:
    """[z^D mu_J(-z)]_+ evaluated at z = psi_x."""
    shifted = ring.monomial({"z": descendant}) * mu_at_minus_z(model, values, ring, twisted)
    return substitute(laurent_truncate_plus(shifted), "z", ring.gen("psi_x"))


def laurent_residue_identity(
    model: ModelSpec, values: Sequence[int], descendant: int, twisted: bool = False
) -> tuple[TruncatedSeries, TruncatedSeries]:
    """(z^{-1}-coefficient of z^D mu_J(-z)/(z - psi), [z^D mu_J(-z)]_+ at z = psi)."""
    bound = descendant + max(mu_bounds(model, len(values))[1], 1) + 1
    ring = localization_ring(model, 0, bound, twisted)
    product = ring.monomial({"z": descendant}) * mu_at_minus_z(model, values, ring, twisted) * geometric_kernel(ring, "psi_x")
    return _z_residue(product), truncated_block(model, values, descendant, ring, twisted)


def residue_relation(
    model: ModelSpec,
    gamma: GammaType,
    d_powers: Sequence[int] | None = None,
    genus_zero_variant: bool = False,
    twisted: bool = False,
    heavy_psi: int = 0,
) -> ResidueRelation:
    """Relation from the vanishing z^{-1} coefficient of the summed fixed-point contributions.

    Standard: contributions are capped with prod psi_{y_j}^{d_j} (on F_J the classes
    at j in J become z), pushed forward (covering degree 1/r' on F_J) and their
    z^{-1} coefficients summed; the result is zero.  Genus-zero variant: the scalar
    form sum_J <psi^c phi_a, mu_J^+(-psi) | ...> = {mu_B(z)}_{z^{-c-1}} with c = heavy_psi.
    """
    n = gamma.n
    d_powers = [0] * n if d_powers is None else list(d_powers)
    if len(d_powers) != n:
        raise ValueError("one descendant power per light marking is required")
    points = enumerate_fixed_points(model, gamma, genus_zero_variant)
    bound = _relation_bound(model, gamma, d_powers) + heavy_psi
    ring = localization_ring(model, n, bound, twisted)
    gamma_prime = GammaType(gamma.heavy + (gamma.light[0],), gamma.light[1:], gamma.genus)
    if genus_zero_variant:
        return _genus_zero_relation(model, gamma, points, ring, twisted, heavy_psi, gamma_prime)
    sel = selection_rule(model, gamma)
    terms = []
    for datum in points:
        contribution = localization_contribution(model, datum, ring, twisted)
        if datum.kind == FJ:
            restricted = ring.monomial({"z": sum(d_powers[j - 1] for j in datum.J)}) * _psi_monomial(ring, d_powers, datum.J)
            degree = Fraction(1, datum.r_prime)
            label = GammaType(
                gamma.heavy + (datum.node_k,),
                tuple(b for j, b in enumerate(gamma.light, 1) if j not in datum.J),
                gamma.genus,
            )
            tag = "gamma_J"
        else:
            restricted = _psi_monomial(ring, d_powers)
            degree = Fraction(1)
            label = gamma_prime if datum.kind == F0 else gamma
            tag = "gamma_prime" if datum.kind == F0 else "gamma"
        coeff = _z_residue(restricted * contribution).scale(degree)
        eps = epsilon_gamma(model, label) if sel else None
        terms.append(RelationTerm(tag, label, coeff, datum.J, eps))
    return ResidueRelation(gamma, terms, details={"selection_rule": sel})


def _genus_zero_relation(model, gamma, points, ring, twisted, heavy_psi, gamma_prime) -> ResidueRelation:
    terms = []
    rhs = Fraction(0)
    for datum in points:
        if datum.kind == F0:
            coeff = ring.one()
            label, tag, J = gamma_prime, "gamma_prime", (1,)
        elif datum.full:
            mu = mu_coefficient(model, datum.values, twisted=twisted, ring=ring)
            rhs = mu.coefficient_in("z", -heavy_psi - 1).constant_term()
            continue
        else:
            coeff = truncated_block(model, datum.values, 0, ring, twisted)
            label = GammaType(
                gamma.heavy + (datum.node_k,),
                tuple(b for j, b in enumerate(gamma.light, 1) if j not in datum.J),
                0,
            )
            tag, J = "gamma_J", datum.J
        terms.append(RelationTerm(tag, label, coeff, J))
    return ResidueRelation(gamma, terms, rhs, genus_zero=True, details={"heavy_psi": heavy_psi})


def expected_relation(
    model: ModelSpec, gamma: GammaType, d_powers: Sequence[int] | None = None, twisted: bool = False
) -> ResidueRelation:
    """Closed form of the standard relation: [gamma'] - [gamma] + sum_J (-1)^{sum ell}[...]_+ [gamma_J] = 0."""
    n = gamma.n
    d_powers = [0] * n if d_powers is None else list(d_powers)
    bound = _relation_bound(model, gamma, d_powers)
    ring = localization_ring(model, n, bound, twisted)
    base = _psi_monomial(ring, d_powers)
    gamma_prime = GammaType(gamma.heavy + (gamma.light[0],), gamma.light[1:], gamma.genus)
    terms = [RelationTerm("gamma_prime", gamma_prime, base), RelationTerm("gamma", gamma, -base)]
    for datum in enumerate_fixed_points(model, gamma)[2:]:
        sign = (-1) ** (sum(sequence_data(model, datum.values).ell) % 2)
        block = truncated_block(model, datum.values, sum(d_powers[j - 1] for j in datum.J), ring, twisted)
        label = GammaType(
            gamma.heavy + (datum.node_k,),
            tuple(b for j, b in enumerate(gamma.light, 1) if j not in datum.J),
            gamma.genus,
        )
        terms.append(RelationTerm("gamma_J", label, block.scale(sign) * _psi_monomial(ring, d_powers, datum.J), datum.J))
    return ResidueRelation(gamma, terms)


def check_residue(
    model: ModelSpec, gamma: GammaType, d_powers: Sequence[int] | None = None, twisted: bool = False
) -> CheckReport:
    """Relation from summed contributions versus the closed form, plus the epsilon identities."""
    got = residue_relation(model, gamma, d_powers, twisted=twisted)
    want = expected_relation(model, gamma, d_powers, twisted)
    mismatches = []
    for a, b in zip(got.terms, want.terms, strict=True):
        if a.label != b.label or a.coefficient != b.coefficient:
            mismatches.append({
                "term": a.tag,
                "J": list(a.J),
                "label": str(a.label),
                "computed": a.coefficient.to_text(),
                "expected": b.coefficient.to_text(),
            })
    details = {"gamma": str(gamma), "d_powers": list(d_powers or [0] * gamma.n), "twisted": twisted}
    if got.details["selection_rule"]:
        eps = epsilon_gamma(model, gamma)
        ok_eps = got.terms[0].epsilon == eps
        for term in got.terms[2:]:
            ell = sum(sequence_data(model, [gamma.light[j - 1] for j in term.J]).ell)
            ok_eps &= eps == (-1) ** (ell % 2) * term.epsilon
        details["epsilon_identities"] = ok_eps
        if not ok_eps:
            mismatches.append({"term": "epsilon", "detail": "epsilon identities fail"})
    return CheckReport("residue", not mismatches, len(got.terms), mismatches, details)


# -- genus-zero resummation ------------------------------------------------------


def relation_lhs(model: ModelSpec, B: Sequence[int], ring: SeriesRing) -> CorrelatorExpr:
    """sum over set partitions pi of B with |pi| >= 2 of <phi_a/(z-psi), (mu^+_P(-psi) phi_{k_P})_P>_{0}, a = -k_B."""
    _, k = split_node(model.r, B)
    a = dual_state(k, model.r)
    out = CorrelatorExpr(ring)
    totals: dict[CorrelatorSymbol, Fraction] = {}
    for part in set_partitions(range(len(B))):
        if len(part) < 2:
            continue
        ins, c = [], Fraction(1)
        for blk in part:
            bi = block_insertion(model, [B[j] for j in blk])
            if bi is None:
                break
            ins.append(bi[0])
            c *= bi[1]
        else:
            sym = CorrelatorSymbol.make(0, ins, a)
            totals[sym] = totals.get(sym, 0) + c
    for sym, c in totals.items():
        out.add(sym, ring.const(c))
    return out


def _relation_sum(model: ModelSpec, ring: SeriesRing, min_n: int = 2) -> list[CorrelatorExpr]:
    """sum_B t^B/|Aut B| * relation_lhs(B), split into phi_{k_B} components."""
    comps = [CorrelatorExpr(ring) for _ in range(model.r)]
    for B in multisets(t_variables(ring), ring.policy.max_t_degree, min_n):
        _, k = split_node(model.r, B)
        weight = ring.monomial(Counter(f"t{b}" for b in B), Fraction(1, automorphism_order(B)))
        for sym, c in relation_lhs(model, B, ring).terms.items():
            comps[k - 1].add(sym, c * weight)
    return comps


def _marked_infinity(model: ModelSpec, insertions, ring: SeriesRing) -> list[CorrelatorExpr]:
    """sum_a phi^a sum_n 1/n! <phi_a/(z-psi), v^n>_{0,1+n}, split by components phi^a = phi_{a'}."""
    comps = [CorrelatorExpr(ring) for _ in range(model.r)]
    for a in range(1, model.r + 1):
        expr = expand_F_infinity(model, 0, insertions, ring, marked=a, selection=True)
        comps[dual_state(a, model.r) - 1] = comps[dual_state(a, model.r) - 1] + expr
    return comps


def check_genus0_resummation(
    model: ModelSpec,
    max_t_degree: int,
    perturb: dict | None = None,
) -> CheckReport:
    """Genus-zero resummation of the relations into mu^-(t, z).

    Route A expands sum_a phi^a sum_n 1/n! <phi_a/(z-psi), mu^+(t,-psi)^n>; route C sums the
    left sides of the per-sequence relations with weights t^B/|Aut B|.  A == C symbol by
    symbol; replacing each relation's left side by mu^-_B(z) must then give mu^-(t, z).
    """
    ring = correlator_ring(model, max_t_degree)
    route_a = _marked_infinity(model, mu_plus_insertions(model, ring, perturb=perturb), ring)
    route_c = _relation_sum(model, ring)
    compared, mismatches = 0, []
    for k in range(1, model.r + 1):
        n, mm = compare_exprs(route_a[k - 1], route_c[k - 1])
        compared += n
        mismatches += [dict(x, component=k) for x in mm]

    mring = mu_ring(model, max_t_degree)
    resummed = [mring.zero() for _ in range(model.r)]
    for B in multisets(t_variables(ring), max_t_degree, 2):
        _, k = split_node(model.r, B)
        weight = mring.monomial(Counter(f"t{b}" for b in B), Fraction(1, automorphism_order(B)))
        resummed[k - 1] = resummed[k - 1] + weight * laurent_truncate_minus(mu_coefficient(model, B, ring=mring))
    target = mu_minus(model, mring)
    vector_ok = StateVector(resummed) == target
    if not vector_ok:
        for k in range(1, model.r + 1):
            if resummed[k - 1] != target[k]:
                mismatches.append({"component": k, "resummed": resummed[k - 1].to_text(), "mu_minus": target[k].to_text()})
    details = {
        "model": model.to_dict(),
        "t_degree": max_t_degree,
        "symbols": sum(len(c) for c in route_a),
        "mu_minus_match": vector_ok,
    }
    return CheckReport("genus0", not mismatches, compared, mismatches, details)


# -- J-function ------------------------------------------------------------------


@dataclass
class JFunction:
    """Plain part (series in t, u, z) plus correlator part, both indexed by phi_1..phi_r."""

    plain: StateVector
    correlators: list[CorrelatorExpr]

    def to_json(self) -> dict:
        return {
            "plain": self.plain.to_json(),
            "correlators": {f"phi{k}": c.to_json() for k, c in enumerate(self.correlators, 1) if not c.is_zero},
        }

    def to_text(self) -> str:
        lines = [self.plain.to_text()]
        for k, c in enumerate(self.correlators, 1):
            if not c.is_zero:
                lines.append(f"phi{k} correlators:\n{c.to_text()}")
        return "\n".join(lines)


@dataclass
class JFunctionResult:
    definitional: JFunction
    resummed: JFunction
    report: CheckReport


def j_function_ring(model: ModelSpec, max_t_degree: int, max_u_degree: int, psi_degree: int) -> SeriesRing:
    z_lo = min(1 - max_t_degree, 0)
    z_hi = max(mu_bounds(model, max(max_t_degree, 1))[1], psi_degree, 1)
    return correlator_ring(model, max_t_degree, max_u_degree, psi_degree, with_z=True, z_range=(z_lo, z_hi))


def _plain_part(model: ModelSpec, ring: SeriesRing) -> StateVector:
    """u(-z) + z phi_1 + mu^+(t, z)."""
    comps = [ring.zero() for _ in range(model.r)]
    z = ring.gen("z")
    for ins, u in heavy_insertions(ring).items():
        comps[ins.state - 1] = comps[ins.state - 1] + u * (-z) ** ins.psi
    comps[0] = comps[0] + z
    variables = t_variables(ring)
    if ring.policy.max_t_degree:
        mring = mu_ring(model, ring.policy.max_t_degree, variables)
        mp = mu_plus(model, mring, variables)
        comps = [c + transfer(mp[k], ring) for k, c in enumerate(comps, 1)]
    return StateVector(comps)


def _zero_theory_marked(model: ModelSpec, ring: SeriesRing) -> list[CorrelatorExpr]:
    """sum_{m>=1, n>=0} sum_a phi^a/(m! n!) <phi_a/(z-psi), u^m | t^n>^0 through partition sums."""
    comps = [CorrelatorExpr(ring) for _ in range(model.r)]
    heavy_types = sorted(heavy_insertions(ring))
    blocks = light_block_table(model, ring)
    acc: dict[CorrelatorSymbol, dict] = {}
    for H in multisets(heavy_types, ring.policy.max_u_degree, 1):
        hkey = ring.monomial_key(Counter(u_name(c, a) for c, a in H))
        hweight = Fraction(1, automorphism_order(H))
        for ins, tpart in blocks.items():
            if len(H) == 1 and not ins:
                continue
            for a in range(1, model.r + 1):
                sym = CorrelatorSymbol(0, tuple(sorted(H + ins)), a)
                if not symbol_selection(model.r, sym):
                    continue
                bucket = acc.setdefault(sym, {})
                for tkey, c in tpart.items():
                    key = merge_monomial_keys(hkey, tkey)
                    bucket[key] = bucket.get(key, 0) + hweight * c
    for sym, terms in acc.items():
        comps[dual_state(sym.marked, model.r) - 1].add(sym, ring.series(terms))
    return comps


def assemble_J_function(
    model: ModelSpec, max_t_degree: int, max_u_degree: int = 0, psi_degree: int = 1
) -> JFunctionResult:
    """The big J-function in its definitional form and in the resummed form, and their comparison.

    In the definitional form mu^- is carried in correlator form: each mu^-_B(z) is
    replaced by the left side of its genus-zero relation.
    """
    ring = j_function_ring(model, max_t_degree, max_u_degree, psi_degree)
    plain = _plain_part(model, ring)

    zero_side = _zero_theory_marked(model, ring)
    mu_minus_side = _relation_sum(model, ring)
    definitional = JFunction(plain, [a + b for a, b in zip(zero_side, mu_minus_side)])

    shift = add_insertions(heavy_insertions(ring), mu_plus_insertions(model, ring))
    resummed = JFunction(plain, _marked_infinity(model, shift, ring) if shift else [CorrelatorExpr(ring) for _ in range(model.r)])

    compared, mismatches = 0, []
    for k in range(1, model.r + 1):
        n, mm = compare_exprs(definitional.correlators[k - 1], resummed.correlators[k - 1])
        compared += n
        mismatches += [dict(x, component=k) for x in mm]
    report = CheckReport(
        "jfunc",
        not mismatches,
        compared,
        mismatches,
        {"model": model.to_dict(), "t_degree": max_t_degree, "u_degree": max_u_degree, "psi_degree": psi_degree},
    )
    return JFunctionResult(definitional, resummed, report)
