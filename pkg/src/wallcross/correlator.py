"""Abstract infinity-theory correlators and the wall-crossing bookkeeping.

Correlators are opaque symbols: a genus plus a multiset of insertions
``psi^c phi_b``.  Generating functions are finite linear combinations of symbols
with :class:`TruncatedSeries` coefficients.  No relation between distinct symbols
is ever used, so every identity checked here is a statement about the
combinatorics of the expansions only.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence

from .model import ModelSpec, is_narrow
from .mu import (
    BroadMode,
    extract_I_functions,
    mu_plus,
    mu_ring,
    mu_scalar,
    split_node,
)
from .series import (
    SeriesRing,
    TruncatedSeries,
    TruncationPolicy,
    format_rational,
    series_log1p,
)


class Insertion(NamedTuple):
    """``psi^psi phi_state`` at one marking; tuples sort by (psi, state)."""

    psi: int
    state: int

    def __str__(self):
        if self.psi == 0:
            return f"phi{self.state}"
        p = "psi" if self.psi == 1 else f"psi^{self.psi}"
        return f"{p}*phi{self.state}"


DILATON = Insertion(1, 1)


class CorrelatorSymbol(NamedTuple):
    """<insertions>_{g, n} of the infinity theory.

    ``marked`` is the state ``a`` of an extra distinguished insertion
    ``phi_a / (z - psi)`` (genus-zero J-function correlators), or None.
    """

    genus: int
    insertions: tuple
    marked: int | None = None

    @classmethod
    def make(cls, genus: int, insertions: Iterable, marked: int | None = None) -> "CorrelatorSymbol":
        return cls(genus, tuple(sorted(Insertion(*i) for i in insertions)), marked)

    @property
    def n_markings(self) -> int:
        return len(self.insertions) + (self.marked is not None)

    @property
    def is_dilaton_leftover(self) -> bool:
        return self.genus == 1 and self.marked is None and self.insertions == (DILATON,)

    @property
    def stable(self) -> bool:
        return 2 * self.genus - 2 + self.n_markings > 0 or self.is_dilaton_leftover

    def states(self) -> list[int]:
        out = [i.state for i in self.insertions]
        if self.marked is not None:
            out.append(self.marked)
        return out

    def max_psi(self) -> int:
        return max((i.psi for i in self.insertions), default=0)

    def __str__(self):
        parts = [str(i) for i in self.insertions]
        if self.marked is not None:
            parts.insert(0, f"phi{self.marked}/(z-psi)")
        return f"<{', '.join(parts)}>_{{{self.genus},{self.n_markings}}}"


def symbol_selection(r: int, symbol: CorrelatorSymbol) -> bool:
    """Selection rule 2g - 2 + sum(1 - a_i) == 0 mod r for the symbol's states."""
    return (2 * symbol.genus - 2 + sum(1 - a for a in symbol.states())) % r == 0


class CorrelatorExpr:
    """Finite sum of correlator symbols with series coefficients in one ring."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring: SeriesRing, terms: Mapping[CorrelatorSymbol, TruncatedSeries] | None = None):
        self.ring = ring
        self.terms: dict[CorrelatorSymbol, TruncatedSeries] = {}
        for sym, c in (terms or {}).items():
            self.add(sym, c)

    def add(self, symbol: CorrelatorSymbol, coeff: TruncatedSeries):
        """Accumulate ``coeff * symbol``; unstable symbols are zero."""
        if not symbol.stable or coeff.is_zero:
            return
        old = self.terms.get(symbol)
        new = coeff if old is None else old + coeff
        if new.is_zero:
            self.terms.pop(symbol, None)
        else:
            self.terms[symbol] = new

    def __add__(self, other: "CorrelatorExpr") -> "CorrelatorExpr":
        out = self.copy()
        for s, c in other.terms.items():
            out.add(s, c)
        return out

    def __sub__(self, other: "CorrelatorExpr") -> "CorrelatorExpr":
        out = self.copy()
        for s, c in other.terms.items():
            out.add(s, -c)
        return out

    def scale(self, c) -> "CorrelatorExpr":
        out = CorrelatorExpr(self.ring)
        for s, v in self.terms.items():
            out.add(s, v * c)
        return out

    def copy(self) -> "CorrelatorExpr":
        out = CorrelatorExpr(self.ring)
        out.terms = dict(self.terms)
        return out

    def filter(self, keep: Callable[[CorrelatorSymbol], bool]) -> "CorrelatorExpr":
        out = CorrelatorExpr(self.ring)
        out.terms = {s: c for s, c in self.terms.items() if keep(s)}
        return out

    def map_coefficients(self, fn: Callable[[TruncatedSeries], TruncatedSeries]) -> "CorrelatorExpr":
        out = CorrelatorExpr(self.ring)
        for s, c in self.terms.items():
            out.add(s, fn(c))
        return out

    def coefficient(self, symbol: CorrelatorSymbol) -> TruncatedSeries:
        return self.terms.get(symbol, self.ring.zero())

    def __eq__(self, other):
        if not isinstance(other, CorrelatorExpr):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __len__(self):
        return len(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def sorted_symbols(self) -> list[CorrelatorSymbol]:
        return sorted(self.terms, key=_symbol_key)

    def to_json(self) -> list[dict]:
        return [{"symbol": str(s), "coefficient": self.terms[s].to_json()} for s in self.sorted_symbols()]

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        return "\n".join(f"({self.terms[s].to_text()}) * {s}" for s in self.sorted_symbols())

    def __repr__(self):
        return f"CorrelatorExpr({len(self.terms)} symbols)"


def _symbol_key(s: CorrelatorSymbol):
    return (s.genus, s.marked is not None, s.marked or 0, len(s.insertions), s.insertions)


# -- combinatorics -------------------------------------------------------------


def set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All partitions of ``items`` into nonempty blocks (blocks ordered by first element)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def ordered_set_partitions(items: Sequence) -> Iterator[list[list]]:
    """All sequences (J_1, ..., J_h) of disjoint nonempty blocks covering ``items``."""
    for part in set_partitions(items):
        yield from (list(p) for p in itertools.permutations(part))


def multisets(types: Sequence, max_size: int, min_size: int = 0) -> Iterator[tuple]:
    for n in range(min_size, max_size + 1):
        yield from itertools.combinations_with_replacement(types, n)


def automorphism_order(multiset: Iterable) -> int:
    return math.prod(math.factorial(e) for e in Counter(multiset).values())


# -- rings and insertion series -----------------------------------------------


def u_name(c: int, a: int) -> str:
    return f"u{c}_{a}"


def correlator_ring(
    model: ModelSpec,
    max_t_degree: int,
    max_u_degree: int = 0,
    psi_degree: int = 0,
    t_vars: Iterable[int] | None = None,
    with_z: bool = False,
    z_range: tuple[int, int] = (0, 0),
) -> SeriesRing:
    """Coefficient ring with t_b, u_{c,a} (c <= psi_degree) and optionally z."""
    t_vars = range(1, model.r + 1) if t_vars is None else sorted(set(t_vars))
    u = [(c, a) for c in range(psi_degree + 1) for a in range(1, model.r + 1)] if max_u_degree else []
    policy = TruncationPolicy(
        max_t_degree=max_t_degree, max_u_degree=max_u_degree, z_min=z_range[0], z_max=z_range[1]
    )
    return SeriesRing.build(policy, t=t_vars, u=u, z=with_z)


def t_variables(ring: SeriesRing) -> list[int]:
    return [int(g[1:]) for g, k in zip(ring.generators, ring.kinds) if k == "t"]


def heavy_insertions(ring: SeriesRing) -> dict[Insertion, TruncatedSeries]:
    """u = sum_{c,a} u_{c,a} psi^c phi_a over the u-generators of ``ring``."""
    out = {}
    for g, k in zip(ring.generators, ring.kinds):
        if k == "u":
            c, a = g[1:].split("_")
            out[Insertion(int(c), int(a))] = ring.gen(g)
    return out


def transfer(s: TruncatedSeries, ring: SeriesRing) -> TruncatedSeries:
    """Re-express ``s`` in ``ring`` by generator name (terms outside the policy drop)."""
    md = s.ring.monomial_dict
    return ring.series({ring.monomial_key(md(m)): c for m, c in s.terms.items()})


def mu_plus_insertions(
    model: ModelSpec,
    ring: SeriesRing,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
    perturb: Mapping[tuple[int, ...], Fraction] | None = None,
) -> dict[Insertion, TruncatedSeries]:
    """mu^+(t, -psi) as insertion series: the z^c part of phi_a becomes (-1)^c psi^c phi_a."""
    variables = t_variables(ring)
    mring = mu_ring(model, ring.policy.max_t_degree, variables)
    mp = mu_plus(model, mring, variables, broad_mode, perturb=perturb)
    out = {}
    for a in mp.nonzero_states():
        comp = mp[a]
        for c in sorted(comp.exponents_of("z")):
            coeff = transfer(comp.coefficient_in("z", c), ring).scale((-1) ** c)
            if not coeff.is_zero:
                out[Insertion(c, a)] = coeff
    return out


def add_insertions(*maps: Mapping[Insertion, TruncatedSeries]) -> dict[Insertion, TruncatedSeries]:
    out: dict[Insertion, TruncatedSeries] = {}
    for m in maps:
        for k, v in m.items():
            out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if not v.is_zero}


# -- infinity side -------------------------------------------------------------


def expand_F_infinity(
    model: ModelSpec,
    genus: int,
    insertion_series: Mapping[Insertion, TruncatedSeries],
    ring: SeriesRing | None = None,
    psi_bound: int | None = None,
    marked: int | None = None,
    selection: bool = False,
) -> CorrelatorExpr:
    """sum_m 1/m! <v^m>_{g,m} for v = sum v_{c,b} psi^c phi_b, expanded multilinearly.

    A multiset of insertion types with multiplicities e_tau gets the coefficient
    prod_tau v_tau^e_tau / e_tau!.  With ``marked = a`` every symbol also carries
    the distinguished insertion phi_a/(z - psi).
    """
    if ring is None:
        if not insertion_series:
            raise ValueError("ring is required when there are no insertion series")
        ring = next(iter(insertion_series.values())).ring
    types = sorted(
        tau for tau, v in insertion_series.items()
        if not v.is_zero and (psi_bound is None or tau.psi <= psi_bound)
    )
    for tau in types:
        if insertion_series[tau].constant_term():
            raise ValueError(f"insertion series for {tau} has a constant term")
    partial: dict[tuple, TruncatedSeries] = {(): ring.one()}
    for tau in types:
        v = insertion_series[tau]
        powers = []
        p = v
        e = 1
        while not p.is_zero:
            powers.append(p.scale(Fraction(1, math.factorial(e))))
            e += 1
            p = p * v
        grown = dict(partial)
        for sym, coeff in partial.items():
            for e, pw in enumerate(powers, 1):
                prod = coeff * pw
                if not prod.is_zero:
                    grown[sym + (tau,) * e] = prod
        partial = grown
    out = CorrelatorExpr(ring)
    for ins, coeff in partial.items():
        sym = CorrelatorSymbol(genus, ins, marked)
        if selection and not symbol_selection(model.r, sym):
            continue
        out.add(sym, coeff)
    return out


# -- zero-theory side ------------------------------------------------------------


def block_insertion(
    model: ModelSpec,
    values: Sequence[int],
    descendant: int = 0,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
) -> tuple[Insertion, Fraction] | None:
    """[z^D mu_J(-z)]_+ at z = psi, as (psi^power phi_k, coefficient), or None if it vanishes."""
    broad_mode = BroadMode.parse(broad_mode)
    _, k = split_node(model.r, values)
    if broad_mode is BroadMode.NARROW and not is_narrow(model, k):
        return None
    e, c = mu_scalar(model, values, broad_mode)
    power = e + descendant
    if power < 0 or not c:
        return None
    return Insertion(power, k), c * (-1) ** (e % 2)


def expand_zero_correlator(
    model: ModelSpec,
    genus: int,
    heavy: Sequence[Insertion],
    light: Sequence[int],
    d_powers: Sequence[int] | None = None,
    ring: SeriesRing | None = None,
    ordered: bool = False,
    marked: int | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
    psi_bound: int | None = None,
) -> CorrelatorExpr:
    """One zero-theory correlator <heavy | psi^d_j phi_b_j> rewritten through infinity symbols.

    Each set partition of the light markings replaces every block J by the single
    insertion [z^{sum d_J} mu_J(-z)]_+ at z = psi carrying state k_J.  With
    ``ordered`` the sum runs over sequences of blocks weighted by 1/h! instead.
    """
    if ring is None:
        ring = SeriesRing.build(TruncationPolicy())
    light = list(light)
    d_powers = [0] * len(light) if d_powers is None else list(d_powers)
    if len(d_powers) != len(light):
        raise ValueError("one descendant power per light marking is required")
    heavy = [Insertion(*h) for h in heavy]
    m = len(heavy) + (marked is not None)
    out = CorrelatorExpr(ring)
    if 2 * genus - 2 + m < 0 or (2 * genus - 2 + m, len(light)) == (0, 0):
        return out
    parts = ordered_set_partitions(range(len(light))) if ordered else set_partitions(range(len(light)))
    total: dict[CorrelatorSymbol, Fraction] = {}
    for part in parts:
        weight = Fraction(1, math.factorial(len(part))) if ordered else Fraction(1)
        ins = list(heavy)
        for block in part:
            bi = block_insertion(
                model, [light[j] for j in block], sum(d_powers[j] for j in block), broad_mode
            )
            if bi is None or (psi_bound is not None and bi[0].psi > psi_bound):
                break
            ins.append(bi[0])
            weight *= bi[1]
        else:
            sym = CorrelatorSymbol.make(genus, ins, marked)
            total[sym] = total.get(sym, 0) + weight
    for sym, c in total.items():
        out.add(sym, ring.const(c))
    return out


def light_block_table(
    model: ModelSpec,
    ring: SeriesRing,
    psi_bound: int | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
    min_blocks: int = 0,
) -> dict[tuple, dict]:
    """sum over light multisets L (weight t^L/|Aut L|) and set partitions of L.

    Returns ``{sorted block insertions: {t-monomial key: coefficient}}``; the empty
    light set contributes ``{(): {(): 1}}`` when ``min_blocks == 0``.
    """
    variables = t_variables(ring)
    cache: dict[tuple, tuple | None] = {}

    def block(values: tuple):
        if values not in cache:
            cache[values] = block_insertion(model, values, 0, broad_mode)
        return cache[values]

    table: dict[tuple, dict] = {}
    for L in multisets(variables, ring.policy.max_t_degree):
        if not L and min_blocks > 0:
            continue
        key = ring.monomial_key(Counter(f"t{b}" for b in L))
        weight = Fraction(1, automorphism_order(L))
        for part in set_partitions(range(len(L))):
            if len(part) < min_blocks:
                continue
            c = weight
            ins = []
            for blk in part:
                bi = block(tuple(sorted(L[j] for j in blk)))
                if bi is None or (psi_bound is not None and bi[0].psi > psi_bound):
                    break
                ins.append(bi[0])
                c *= bi[1]
            else:
                bucket = table.setdefault(tuple(sorted(ins)), {})
                bucket[key] = bucket.get(key, 0) + c
    return {k: {m: c for m, c in v.items() if c} for k, v in table.items()}


def merge_monomial_keys(a: tuple, b: tuple) -> tuple:
    """Product of two sparse monomial keys."""
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for i, e in b:
        d[i] = d.get(i, 0) + e
    return tuple(sorted(d.items()))


def expand_F_zero_via_wallcrossing(
    model: ModelSpec,
    genus: int,
    ring: SeriesRing,
    psi_bound: int | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
    selection: bool = False,
) -> CorrelatorExpr:
    """F^0_g(u, t) with every zero-theory correlator rewritten as a partition sum.

    Heavy multisets H over the u-generators carry u^H/|Aut H|; light multisets and
    their partitions come from :func:`light_block_table`.  Zero-theory correlators
    with 2g-2+m < 0 or (2g-2+m, n) = (0, 0) vanish.
    """
    heavy_types = sorted(heavy_insertions(ring))
    blocks = light_block_table(model, ring, psi_bound, broad_mode)
    acc: dict[CorrelatorSymbol, dict] = {}
    for H in multisets(heavy_types, ring.policy.max_u_degree):
        m = len(H)
        euler = 2 * genus - 2 + m
        if euler < 0:
            continue
        hkey = ring.monomial_key(Counter(u_name(c, a) for c, a in H))
        hweight = Fraction(1, automorphism_order(H))
        for ins, tpart in blocks.items():
            if euler == 0 and not ins:
                continue
            sym = CorrelatorSymbol(genus, tuple(sorted(H + ins)))
            if selection and not symbol_selection(model.r, sym):
                continue
            bucket = acc.setdefault(sym, {})
            for tkey, c in tpart.items():
                key = merge_monomial_keys(hkey, tkey)
                bucket[key] = bucket.get(key, 0) + hweight * c
    out = CorrelatorExpr(ring)
    for sym, terms in acc.items():
        out.add(sym, ring.series(terms))
    return out


# -- comparison reports --------------------------------------------------------


@dataclass
class CheckReport:
    name: str
    ok: bool
    compared: int = 0
    mismatches: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "ok": self.ok,
            "compared": self.compared,
            "details": self.details,
            "mismatches": self.mismatches,
        }

    def summary(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name} ({self.compared} coefficients compared)"


def _u_degree_mask(min_u: int) -> Callable[[dict], bool]:
    return lambda md: sum(e for g, e in md.items() if g.startswith("u")) >= min_u


def compare_exprs(
    lhs: CorrelatorExpr,
    rhs: CorrelatorExpr,
    mask: Callable[[dict], bool] | None = None,
    limit: int = 5,
) -> tuple[int, list[dict]]:
    """Compare coefficients symbol by symbol; returns (number compared, first mismatches)."""
    compared = 0
    mismatches: list[dict] = []
    symbols = sorted(set(lhs.terms) | set(rhs.terms), key=_symbol_key)
    zero = lhs.ring.zero()
    for sym in symbols:
        a = lhs.terms.get(sym, zero)
        b = rhs.terms.get(sym, zero)
        if mask is not None:
            a, b = a.filter(mask), b.filter(mask)
        keys = set(a.terms) | set(b.terms)
        compared += len(keys)
        if a == b:
            continue
        diff = a - b
        for mono, _ in diff.sorted_terms():
            if len(mismatches) >= limit:
                break
            md = lhs.ring.monomial_dict(mono)
            mismatches.append({
                "symbol": str(sym),
                "monomial": md,
                "lhs": format_rational(a.terms.get(mono, 0)),
                "rhs": format_rational(b.terms.get(mono, 0)),
            })
        if len(mismatches) >= limit:
            break
    return compared, mismatches


def check_wallcrossing_identity(
    model: ModelSpec,
    genus: int,
    max_t_degree: int,
    max_u_degree: int,
    psi_degree: int,
    g0_mask: bool | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
    perturb: Mapping[tuple[int, ...], Fraction] | None = None,
    selection: bool = True,
    narrow_only: bool = False,
) -> CheckReport:
    """F^0_g(u, t) versus F^infinity_g(u + mu^+(t, -psi)), coefficient by coefficient.

    The left side expands each zero-theory correlator over set partitions of its
    light markings; the right side expands powers of the shifted insertion series.
    Symbols with an insertion psi-power above ``psi_degree`` are dropped on both
    sides.  In genus zero the zero theory only starts at two heavy markings, so
    the comparison masks u-degree <= 1 (``g0_mask``, on by default for g = 0).
    ``perturb`` shifts mu coefficients on the right side only (negative control).
    ``selection`` drops symbols violating the selection rule on both sides;
    ``narrow_only`` also drops symbols with a broad insertion (broad vanishing).
    """
    ring = correlator_ring(model, max_t_degree, max_u_degree, psi_degree)
    lhs = expand_F_zero_via_wallcrossing(model, genus, ring, psi_degree, broad_mode, selection)
    shift = add_insertions(heavy_insertions(ring), mu_plus_insertions(model, ring, broad_mode, perturb))
    rhs = expand_F_infinity(model, genus, shift, ring, psi_bound=psi_degree, selection=selection)
    if narrow_only:
        def all_narrow(sym: CorrelatorSymbol) -> bool:
            return all(is_narrow(model, a) for a in sym.states())

        lhs, rhs = lhs.filter(all_narrow), rhs.filter(all_narrow)
    if g0_mask is None:
        g0_mask = genus == 0
    mask = _u_degree_mask(2) if g0_mask else None
    compared, mismatches = compare_exprs(lhs, rhs, mask)
    return CheckReport(
        "wallcross",
        not mismatches,
        compared,
        mismatches,
        {
            "model": model.to_dict(),
            "genus": genus,
            "t_degree": max_t_degree,
            "u_degree": max_u_degree,
            "psi_degree": psi_degree,
            "g0_mask": g0_mask,
            "selection_filter": selection,
            "narrow_only": narrow_only,
            "broad_mode": BroadMode.parse(broad_mode).value,
            "lhs_symbols": len(lhs),
            "rhs_symbols": len(rhs),
        },
    )


# -- dilaton -------------------------------------------------------------------


def dilaton_reduce(expr: CorrelatorExpr) -> CorrelatorExpr:
    """Remove psi*phi_1 insertions with <psi phi_1, X>_{g,m+1} = (2g-2+m) <X>_{g,m}.

    <psi phi_1>_{1,1} is terminal.  A zero factor kills the symbol.
    """
    out = CorrelatorExpr(expr.ring)
    for sym, coeff in expr.terms.items():
        ins = list(sym.insertions)
        factor = 1
        while DILATON in ins:
            reduced = CorrelatorSymbol(sym.genus, tuple(ins), sym.marked)
            if reduced.is_dilaton_leftover:
                break
            ins.remove(DILATON)
            m = len(ins) + (sym.marked is not None)
            factor *= 2 * sym.genus - 2 + m
            if factor == 0:
                break
        if factor:
            out.add(CorrelatorSymbol(sym.genus, tuple(ins), sym.marked), coeff.scale(factor))
    return out


def _normalization_factor(lhs: CorrelatorExpr, rhs: CorrelatorExpr) -> Fraction | None:
    """A single constant lam with lhs = lam * rhs, if one exists (and lam != 1)."""
    lam = None
    for sym in set(lhs.terms) | set(rhs.terms):
        a, b = lhs.coefficient(sym), rhs.coefficient(sym)
        for mono in set(a.terms) | set(b.terms):
            x, y = a.terms.get(mono, 0), b.terms.get(mono, 0)
            if not y:
                return None
            ratio = Fraction(x) / y
            if lam is None:
                lam = ratio
            elif ratio != lam:
                return None
    return lam if lam not in (None, 1) else None


def check_dilaton_closed_form(model: ModelSpec, genus: int, max_t_degree: int) -> CheckReport:
    """Dilaton reduction of F^infinity_g(mu^+(t phi_2, -psi)) against the closed I_0, I_1 form.

    genus >= 2:  I_0^{2g-2} * reduced = sum_n (I_1/I_0)^n / n! <phi_2^n>_{g,n}
    genus == 1:  reduced = -log(I_0) <psi phi_1>_{1,1} + sum_{n>=1} (I_1/I_0)^n / n! <phi_2^n>_{1,n}
    """
    if genus < 1:
        raise ValueError("the closed form needs genus >= 1")
    I0, I1 = extract_I_functions(model, max_t_degree)
    ring = I0.ring
    shift = mu_plus_insertions(model, ring)
    expanded = expand_F_infinity(model, genus, shift, ring)
    reduced = dilaton_reduce(expanded)
    details: dict = {"model": model.to_dict(), "genus": genus, "t_degree": max_t_degree}

    ratio = I1 * I0 ** -1
    expected = CorrelatorExpr(ring)
    power = ring.one()
    for n in range(max_t_degree + 1):
        if n:
            power = power * ratio
        if power.is_zero:
            break
        expected.add(CorrelatorSymbol(genus, (Insertion(0, 2),) * n), power.scale(Fraction(1, math.factorial(n))))

    # scalar identities used by the closed form
    x = ring.one() - I0
    scalar_ok = True
    for n in range(max_t_degree + 1):
        N = 2 * genus - 2 + n
        if N <= 0:
            continue
        lhs_sum, xm = ring.zero(), ring.one()
        for mm in range(max_t_degree + 1):
            lhs_sum = lhs_sum + xm.scale(Fraction(math.prod(range(N, N + mm)), math.factorial(mm)))
            xm = xm * x
        scalar_ok &= lhs_sum == I0 ** (-N)
    details["resummation_identity"] = scalar_ok

    if genus == 1:
        log_term = -series_log1p(I0 - 1)
        alternating = ring.zero()
        xm = ring.one()
        for mm in range(1, max_t_degree + 1):
            xm = xm * (I0 - 1)
            alternating = alternating + xm.scale(Fraction((-1) ** mm, mm))
        details["log_identity"] = alternating == log_term
        scalar_ok &= details["log_identity"]
        expected.add(CorrelatorSymbol(1, (DILATON,)), log_term)
        lhs = reduced
        details["log_coefficient"] = reduced.coefficient(CorrelatorSymbol(1, (DILATON,))).to_text()
    else:
        lhs = reduced.map_coefficients(lambda c: c * I0 ** (2 * genus - 2))
    compared, mismatches = compare_exprs(lhs, expected)
    if mismatches:
        lam = _normalization_factor(lhs, expected)
        if lam is not None:
            details["normalization_mismatch"] = format_rational(lam)
    return CheckReport("dilaton", not mismatches and scalar_ok, compared, mismatches, details)

