"""The mu-series: per-sequence data, Laurent coefficients, generating series, I-functions."""

from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .model import ModelSpec, frac, is_narrow
from .series import (
    SeriesRing,
    TruncatedSeries,
    TruncationPolicy,
    laurent_truncate_minus,
    laurent_truncate_plus,
)


class BroadMode(str, enum.Enum):
    AS_WRITTEN = "as-written"
    NARROW = "narrow-redefined"

    @classmethod
    def parse(cls, value: "str | BroadMode") -> "BroadMode":
        if isinstance(value, BroadMode):
            return value
        if value in ("narrow", "narrow-redefined"):
            return cls.NARROW
        if value == "as-written":
            return cls.AS_WRITTEN
        raise ValueError(f"unknown broad mode {value!r}")


class NotCalabiYauError(ValueError):
    pass


def pochhammer(x: Fraction | int, n: int) -> Fraction:
    """Rising factorial x(x+1)...(x+n-1); [x]_0 = 1."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = Fraction(1)
    x = Fraction(x)
    for i in range(n):
        out *= x + i
    return out


def split_node(r: int, B: Sequence[int]) -> tuple[int, int]:
    """(ell, k) with r*ell + k = 1 + sum(b - 1), 1 <= k <= r, ell >= 0."""
    total = 1 + sum(b - 1 for b in B)
    ell, k = divmod(total - 1, r)
    return ell, k + 1


@dataclass(frozen=True)
class SequenceData:
    B: tuple[int, ...]
    k: int
    ell: tuple[int, ...]
    k_alpha: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.B)

    @property
    def exponent(self) -> int:
        """z-exponent 1 - n + sum_alpha ell_alpha of mu_B."""
        return 1 - self.n + sum(self.ell)


def sequence_data(model: ModelSpec, B: Sequence[int], broad_mode: BroadMode | str = BroadMode.AS_WRITTEN) -> SequenceData:
    B = tuple(B)
    for b in B:
        if not 1 <= b <= model.r:
            raise ValueError(f"entry {b} outside 1..{model.r}")
    _, k = split_node(model.r, B)
    ell = tuple(math.floor(sum((frac(q * (b - 1)) for b in B), Fraction(0))) for q in model.charges)
    if BroadMode.parse(broad_mode) is BroadMode.NARROW:
        k_alpha = tuple(frac(q * k) for q in model.charges)
    else:
        k_alpha = tuple(q + frac(q * (k - 1)) for q in model.charges)
    return SequenceData(B, k, ell, k_alpha)


def mu_scalar(model: ModelSpec, B: Sequence[int], broad_mode: BroadMode | str = BroadMode.AS_WRITTEN) -> tuple[int, Fraction]:
    """(z-exponent, coefficient) of the untwisted Laurent monomial mu_B(z)."""
    data = sequence_data(model, B, broad_mode)
    c = Fraction(1)
    for ka, la in zip(data.k_alpha, data.ell):
        c *= pochhammer(ka, la)
    return data.exponent, c


def mu_bounds(model: ModelSpec, max_n: int) -> tuple[int, int]:
    """z-exponent range covering mu_B for all |B| <= max_n."""
    return 1 - max_n, 1 + max_n * max(model.s - 1, 0)


def mu_ring(
    model: ModelSpec,
    max_t_degree: int,
    variables: Iterable[int] | None = None,
    twisted: bool = False,
) -> SeriesRing:
    """Ring with t-variables, z and (when twisted) lambda generators sized for mu up to max_t_degree."""
    variables = list(range(1, model.r + 1)) if variables is None else sorted(set(variables))
    z_min, z_max = mu_bounds(model, max(max_t_degree, 1))
    policy = TruncationPolicy(
        max_t_degree=max_t_degree,
        z_min=min(z_min, 0),
        z_max=z_max,
        max_lambda_degree=max_t_degree * model.s if twisted else 0,
    )
    return SeriesRing.build(policy, t=variables, z=True, lambdas=model.s if twisted else 0)


def mu_coefficient(
    model: ModelSpec,
    B: Sequence[int],
    twisted: bool = False,
    ring: SeriesRing | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
) -> TruncatedSeries:
    """mu_B(z), or its equivariant twist when ``twisted``."""
    if ring is None:
        ring = mu_ring(model, len(B), variables=(), twisted=twisted)
    data = sequence_data(model, B, broad_mode)
    if not twisted:
        e, c = mu_scalar(model, B, broad_mode)
        return ring.monomial({"z": e}, c)
    out = ring.monomial({"z": 1 - data.n})
    z = ring.gen("z")
    for alpha, (w, ka, la) in enumerate(zip(model.weights, data.k_alpha, data.ell), 1):
        lam = ring.gen(f"lam{alpha}").scale(w)
        for i in range(la):
            out = out * (z.scale(ka + i) + lam)
    return out


class StateVector:
    """Element of the state space spanned by phi_1..phi_r, with series coefficients."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[TruncatedSeries]):
        self.components = tuple(components)
        rings = {c.ring for c in self.components}
        if len(rings) > 1:
            raise ValueError("state vector components must share a ring")

    @classmethod
    def zero(cls, ring: SeriesRing, r: int) -> "StateVector":
        return cls([ring.zero()] * r)

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def ring(self) -> SeriesRing:
        return self.components[0].ring

    def __getitem__(self, a: int) -> TruncatedSeries:
        """Coefficient of phi_a (1-based)."""
        if not 1 <= a <= self.r:
            raise IndexError(a)
        return self.components[a - 1]

    def __add__(self, other: "StateVector") -> "StateVector":
        return StateVector([x + y for x, y in zip(self.components, other.components, strict=True)])

    def __sub__(self, other: "StateVector") -> "StateVector":
        return StateVector([x - y for x, y in zip(self.components, other.components, strict=True)])

    def __neg__(self):
        return StateVector([-x for x in self.components])

    def __eq__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.components == other.components

    def map(self, fn: Callable[[TruncatedSeries], TruncatedSeries]) -> "StateVector":
        return StateVector([fn(c) for c in self.components])

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def nonzero_states(self) -> list[int]:
        return [a for a, c in enumerate(self.components, 1) if not c.is_zero]

    def to_json(self) -> dict:
        return {f"phi{a}": c.to_json() for a, c in enumerate(self.components, 1)}

    def to_text(self) -> str:
        lines = [f"phi{a}: {c.to_text()}" for a, c in enumerate(self.components, 1) if not c.is_zero]
        return "\n".join(lines) if lines else "0"

    def __repr__(self):
        return f"StateVector({self.to_text()!r})"


def _check_variables(model: ModelSpec, ring: SeriesRing, variables) -> list[int]:
    if variables is None:
        variables = [b for b in range(1, model.r + 1) if ring.has(f"t{b}")]
    variables = sorted(set(variables))
    for b in variables:
        if not 1 <= b <= model.r:
            raise ValueError(f"variable t{b} outside 1..{model.r}")
        if not ring.has(f"t{b}"):
            raise KeyError(f"t{b} is not a generator of the ring")
    return variables


def _broad_mask(model: ModelSpec, broad_mode: BroadMode) -> Callable[[int], bool]:
    if broad_mode is BroadMode.NARROW:
        return lambda k: is_narrow(model, k)
    return lambda k: True


def mu_series(
    model: ModelSpec,
    ring: SeriesRing,
    variables: Iterable[int] | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
    twisted: bool = False,
    perturb: Mapping[tuple[int, ...], Fraction] | None = None,
) -> StateVector:
    """mu(t, z) summed over multisets of light states up to the ring's t-degree.

    Each multiset with multiplicities e_b stands for n!/prod(e_b!) sequences, so it
    contributes t^e / prod(e_b!) * mu_B(z) phi_{k_B}.  ``perturb`` adds a constant
    to the coefficient of mu_B for the given sorted multisets (negative controls).
    """
    broad_mode = BroadMode.parse(broad_mode)
    variables = _check_variables(model, ring, variables)
    keep = _broad_mask(model, broad_mode)
    perturb = dict(perturb or {})
    buckets: list[dict] = [dict() for _ in range(model.r)]
    extra: list[TruncatedSeries] = [ring.zero()] * model.r
    for n in range(1, ring.policy.max_t_degree + 1):
        for B in itertools.combinations_with_replacement(variables, n):
            counts = Counter(B)
            weight = Fraction(1, math.prod(math.factorial(e) for e in counts.values()))
            _, k = split_node(model.r, B)
            if not keep(k):
                continue
            tmono = {f"t{b}": e for b, e in counts.items()}
            if twisted:
                coeff = mu_coefficient(model, B, twisted=True, ring=ring, broad_mode=broad_mode)
                extra[k - 1] = extra[k - 1] + coeff * ring.monomial(tmono, weight)
                continue
            e, c = mu_scalar(model, B, broad_mode)
            c += perturb.get(B, 0)
            key = ring.monomial_key({**tmono, "z": e})
            bucket = buckets[k - 1]
            bucket[key] = bucket.get(key, 0) + weight * c
    return StateVector([ring.series(b) + x for b, x in zip(buckets, extra)])


def mu_series_by_sequences(
    model: ModelSpec,
    ring: SeriesRing,
    variables: Iterable[int] | None = None,
    broad_mode: BroadMode | str = BroadMode.AS_WRITTEN,
) -> StateVector:
    """Slow oracle: the defining sum over ordered sequences B_n with weight 1/n!."""
    broad_mode = BroadMode.parse(broad_mode)
    variables = _check_variables(model, ring, variables)
    keep = _broad_mask(model, broad_mode)
    comps = [ring.zero() for _ in range(model.r)]
    for n in range(1, ring.policy.max_t_degree + 1):
        inv_nfact = Fraction(1, math.factorial(n))
        for B in itertools.product(variables, repeat=n):
            _, k = split_node(model.r, B)
            if not keep(k):
                continue
            mono = ring.monomial({f"t{b}": 1 for b in B} if len(set(B)) == n else dict(Counter(f"t{b}" for b in B)))
            comps[k - 1] = comps[k - 1] + mono * mu_coefficient(model, B, ring=ring, broad_mode=broad_mode).scale(inv_nfact)
    return StateVector(comps)


def mu_plus(model: ModelSpec, ring: SeriesRing, variables=None, broad_mode=BroadMode.AS_WRITTEN, **kw) -> StateVector:
    return mu_series(model, ring, variables, broad_mode, **kw).map(laurent_truncate_plus)


def mu_minus(model: ModelSpec, ring: SeriesRing, variables=None, broad_mode=BroadMode.AS_WRITTEN, **kw) -> StateVector:
    return mu_series(model, ring, variables, broad_mode, **kw).map(laurent_truncate_minus)


def extract_I_functions(model: ModelSpec, max_degree: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """I_0, I_1 with mu^+(t phi_2, z) = (I_0 - 1) z phi_1 + I_1 phi_2 (series in t2)."""
    if not model.is_calabi_yau:
        raise NotCalabiYauError(f"I-functions need q = 1, got q = {model.q}")
    ring = mu_ring(model, max_degree, variables=[2])
    mp = mu_plus(model, ring, variables=[2])
    for a in mp.nonzero_states():
        if a not in (1, 2):
            raise AssertionError(f"mu^+(t phi_2, z) has a phi_{a} component")
    if mp[1].exponents_of("z") - {1}:
        raise AssertionError("phi_1 component of mu^+ is not proportional to z")
    if mp[2].exponents_of("z") - {0}:
        raise AssertionError("phi_2 component of mu^+ depends on z")
    t_ring = SeriesRing.build(TruncationPolicy(max_t_degree=max_degree), t=[2])
    I0 = t_ring.one() + _retag(mp[1].coefficient_in("z", 1), t_ring)
    I1 = _retag(mp[2].coefficient_in("z", 0), t_ring)
    return I0, I1


def _retag(s: TruncatedSeries, ring: SeriesRing) -> TruncatedSeries:
    """Move a series into ``ring`` by generator name."""
    md = s.ring.monomial_dict
    return ring.series({ring.monomial_key(md(m)): c for m, c in s.terms.items()})
