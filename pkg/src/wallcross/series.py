"""Exact truncated multivariate power/Laurent series over Q.

A :class:`SeriesRing` fixes the generator set and the truncation policy for a
computation.  Series built in the same ring can be combined; everything else
raises :class:`IncompatibleRingError`.  Truncation is applied eagerly, so every
stored term is inside the policy bounds.

Generator names carry their kind:

* ``t<b>``        light-state variables (total degree <= ``max_t_degree``)
* ``u<c>_<b>``    heavy-state variables (total degree <= ``max_u_degree``)
* ``z``           Laurent variable (``z_min <= exponent <= z_max``)
* ``lam<alpha>``  equivariant parameters (total degree <= ``max_lambda_degree``)
* ``psi...``      cotangent-line classes, each exponent in ``0..z_max``
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]
# A monomial is a tuple of (generator index, nonzero exponent), sorted by index.
Monomial = tuple

T, U, Z, LAM, PSI = "t", "u", "z", "lam", "psi"


class IncompatibleRingError(ValueError):
    """Operands live in different rings (generators or truncation differ)."""


class NonInvertibleSubstitution(ValueError):
    pass


def generator_kind(name: str) -> str:
    if name.startswith("psi"):
        return PSI
    if name.startswith("lam"):
        return LAM
    if name == "z":
        return Z
    if name.startswith("t"):
        return T
    if name.startswith("u"):
        return U
    raise ValueError(f"unknown generator name {name!r}")


@dataclass(frozen=True)
class TruncationPolicy:
    max_t_degree: int = 0
    max_u_degree: int = 0
    z_min: int = 0
    z_max: int = 0
    max_lambda_degree: int = 0

    def __post_init__(self):
        for name in ("max_t_degree", "max_u_degree", "z_max", "max_lambda_degree"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.z_min > 0:
            raise ValueError("z_min must be <= 0")


class SeriesRing:
    """Generator set plus truncation policy; the parent of a family of series."""

    def __init__(self, generators: Iterable[str], policy: TruncationPolicy):
        self.generators = tuple(generators)
        if len(set(self.generators)) != len(self.generators):
            raise ValueError("duplicate generator names")
        self.policy = policy
        self.kinds = tuple(generator_kind(g) for g in self.generators)
        self.index = {g: i for i, g in enumerate(self.generators)}
        self._key = (self.generators, policy)

    @classmethod
    def build(
        cls,
        policy: TruncationPolicy,
        t: Iterable[int] = (),
        u: Iterable[tuple[int, int]] = (),
        z: bool = False,
        lambdas: int = 0,
        psi: Iterable[str] = (),
    ) -> "SeriesRing":
        """Declare generators in the canonical enumeration order t, u, z, lam, psi."""
        gens = [f"t{b}" for b in t]
        gens += [f"u{c}_{b}" for c, b in u]
        if z:
            gens.append("z")
        gens += [f"lam{a}" for a in range(1, lambdas + 1)]
        gens += [p if p.startswith("psi") else f"psi_{p}" for p in psi]
        return cls(gens, policy)

    def __eq__(self, other):
        return isinstance(other, SeriesRing) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"SeriesRing({list(self.generators)}, {self.policy})"

    # -- monomials -------------------------------------------------------

    def monomial_key(self, exponents: Mapping[str, int]) -> Monomial:
        pairs = []
        for name, e in exponents.items():
            if e:
                try:
                    pairs.append((self.index[name], int(e)))
                except KeyError:
                    raise KeyError(f"generator {name!r} not declared in {self!r}") from None
        return tuple(sorted(pairs))

    def monomial_dict(self, mono: Monomial) -> dict[str, int]:
        return {self.generators[i]: e for i, e in mono}

    def grade(self, mono: Monomial) -> tuple[int, int, int, int]:
        """(t-degree, u-degree, lambda-degree, z-exponent)."""
        t = u = lam = z = 0
        kinds = self.kinds
        for i, e in mono:
            k = kinds[i]
            if k is T:
                t += e
            elif k is U:
                u += e
            elif k is LAM:
                lam += e
            elif k is Z:
                z += e
        return t, u, lam, z

    def _grade_ok(self, t, u, lam, z) -> bool:
        p = self.policy
        return (
            t <= p.max_t_degree
            and u <= p.max_u_degree
            and lam <= p.max_lambda_degree
            and p.z_min <= z <= p.z_max
        )

    def admissible(self, mono: Monomial) -> bool:
        kinds = self.kinds
        zmax = self.policy.z_max
        for i, e in mono:
            k = kinds[i]
            if k is PSI:
                if e < 0 or e > zmax:
                    return False
            elif k is not Z and e < 0:
                return False
        return self._grade_ok(*self.grade(mono))

    # -- constructors ----------------------------------------------------

    def series(self, terms: Mapping) -> "TruncatedSeries":
        """Build a series from ``{monomial: coefficient}``.

        Monomials may be given as ``{name: exponent}`` dicts, as internal keys,
        or as a generator name string.  Out-of-policy terms are discarded.
        """
        out: dict = {}
        for mono, c in terms.items():
            if isinstance(mono, str):
                mono = self.monomial_key({mono: 1})
            elif isinstance(mono, Mapping):
                mono = self.monomial_key(mono)
            if not self.admissible(mono):
                continue
            c = Fraction(c)
            if c:
                out[mono] = out.get(mono, 0) + c
                if not out[mono]:
                    del out[mono]
        return TruncatedSeries(self, out)

    def zero(self) -> "TruncatedSeries":
        return TruncatedSeries(self, {})

    def one(self) -> "TruncatedSeries":
        return self.const(1)

    def const(self, c: Rational) -> "TruncatedSeries":
        return self.series({(): c})

    def gen(self, name: str) -> "TruncatedSeries":
        return self.series({self.monomial_key({name: 1}): 1})

    def monomial(self, exponents: Mapping[str, int], coeff: Rational = 1) -> "TruncatedSeries":
        return self.series({self.monomial_key(exponents): coeff})

    def has(self, name: str) -> bool:
        return name in self.index


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for i, e in b:
        e2 = d.get(i, 0) + e
        if e2:
            d[i] = e2
        else:
            del d[i]
    return tuple(sorted(d.items()))


class TruncatedSeries:
    """Immutable element of a :class:`SeriesRing`; ``terms`` maps monomial -> Fraction."""

    __slots__ = ("ring", "terms", "_graded")

    def __init__(self, ring: SeriesRing, terms: dict):
        self.ring = ring
        self.terms = terms
        self._graded = None

    def graded_terms(self) -> tuple[list, tuple[int, int, int]]:
        """Terms as (monomial, coeff, t, u, lam, z) sorted by t-degree, plus minimal (t, u, lam)."""
        if self._graded is None:
            grade = self.ring.grade
            rows = sorted(((m, c) + grade(m) for m, c in self.terms.items()), key=lambda row: row[2])
            mins = (
                min((row[2] for row in rows), default=0),
                min((row[3] for row in rows), default=0),
                min((row[4] for row in rows), default=0),
            )
            self._graded = (rows, mins)
        return self._graded

    # -- basic protocol --------------------------------------------------

    def _check(self, other: "TruncatedSeries"):
        if self.ring is not other.ring and self.ring != other.ring:
            raise IncompatibleRingError(f"{self.ring!r} vs {other.ring!r}")

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.const(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"TruncatedSeries({self.to_text()})"

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            c2 = out.get(m, 0) + c
            if c2:
                out[m] = c2
            else:
                del out[m]
        return TruncatedSeries(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.ring, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Rational) -> "TruncatedSeries":
        c = Fraction(c)
        if not c:
            return self.ring.zero()
        return TruncatedSeries(self.ring, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        ring = self.ring
        if not self.terms or not other.terms:
            return ring.zero()
        p = ring.policy
        arows, (ta0, ua0, la0) = self.graded_terms()
        brows, (tb0, ub0, lb0) = other.graded_terms()
        if ta0 + tb0 > p.max_t_degree or ua0 + ub0 > p.max_u_degree or la0 + lb0 > p.max_lambda_degree:
            return ring.zero()
        has_psi = PSI in ring.kinds
        max_t, max_u, max_l, z_lo, z_hi = p.max_t_degree, p.max_u_degree, p.max_lambda_degree, p.z_min, p.z_max
        out: dict = {}
        for ma, ca, ta, ua, la, za in arows:
            t_budget = max_t - ta
            if t_budget < tb0:
                break
            u_budget, l_budget = max_u - ua, max_l - la
            for mb, cb, tb, ub, lb, zb in brows:
                if tb > t_budget:
                    break
                if ub > u_budget or lb > l_budget or not z_lo <= za + zb <= z_hi:
                    continue
                m = _mono_mul(ma, mb)
                if has_psi and not ring.admissible(m):
                    continue
                c = out.get(m, 0) + ca * cb
                if c:
                    out[m] = c
                else:
                    del out[m]
        return TruncatedSeries(ring, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, TruncatedSeries):
            return self * series_inverse(other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return series_inverse(self) ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- inspection ------------------------------------------------------

    def coefficient(self, exponents: Mapping[str, int] | None = None) -> Fraction:
        key = self.ring.monomial_key(exponents or {})
        return self.terms.get(key, Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def coefficient_in(self, name: str, exponent: int) -> "TruncatedSeries":
        """Coefficient of ``name**exponent`` as a series in the remaining generators."""
        i = self.ring.index[name]
        out = {}
        for m, c in self.terms.items():
            e = dict(m).get(i, 0)
            if e == exponent:
                out[tuple(p for p in m if p[0] != i)] = c
        return TruncatedSeries(self.ring, out)

    def exponents_of(self, name: str) -> set[int]:
        i = self.ring.index[name]
        return {dict(m).get(i, 0) for m in self.terms}

    def filter(self, predicate) -> "TruncatedSeries":
        """Sub-series of terms whose ``{name: exponent}`` dict satisfies ``predicate``."""
        md = self.ring.monomial_dict
        return TruncatedSeries(
            self.ring, {m: c for m, c in self.terms.items() if predicate(md(m))}
        )

    def degree_in(self, kind: str) -> int:
        """Largest total degree in generators of ``kind`` (t, u, lam) over all terms."""
        kinds = self.ring.kinds
        best = 0
        for m in self.terms:
            best = max(best, sum(e for i, e in m if kinds[i] == kind))
        return best

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        n = len(self.ring.generators)

        def key(item):
            dense = [0] * n
            for i, e in item[0]:
                dense[i] = e
            return (sum(dense), tuple(dense))

        return sorted(self.terms.items(), key=key)

    # -- serialization ---------------------------------------------------

    def to_json(self) -> list[dict]:
        md = self.ring.monomial_dict
        return [
            {"monomial": md(m), "num": str(c.numerator), "den": str(c.denominator)}
            for m, c in self.sorted_terms()
        ]

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        names = self.ring.generators
        for m, c in self.sorted_terms():
            factors = [names[i] if e == 1 else f"{names[i]}^{e}" for i, e in m]
            if not factors:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append("*".join([format_rational(c)] + factors))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


def format_rational(c: Rational) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def series_from_json(ring: SeriesRing, data: list[dict]) -> TruncatedSeries:
    return ring.series(
        {ring.monomial_key(item["monomial"]): Fraction(int(item["num"]), int(item["den"])) for item in data}
    )


def dumps_series(s: TruncatedSeries) -> str:
    return json.dumps(s.to_json(), sort_keys=True)


# -- named operations ---------------------------------------------------------


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return a * b


def _z_split(s: TruncatedSeries, keep_nonnegative: bool) -> TruncatedSeries:
    ring = s.ring
    if not ring.has("z"):
        return s if keep_nonnegative else ring.zero()
    iz = ring.index["z"]
    out = {}
    for m, c in s.terms.items():
        e = dict(m).get(iz, 0)
        if (e >= 0) == keep_nonnegative:
            out[m] = c
    return TruncatedSeries(ring, out)


def laurent_truncate_plus(s: TruncatedSeries) -> TruncatedSeries:
    """Terms with nonnegative power of z."""
    return _z_split(s, True)


def laurent_truncate_minus(s: TruncatedSeries) -> TruncatedSeries:
    """Terms with strictly negative power of z."""
    return _z_split(s, False)


def substitute(s: TruncatedSeries, generator: str, value: TruncatedSeries) -> TruncatedSeries:
    """Replace ``generator`` by ``value`` everywhere in ``s`` and re-truncate."""
    ring = s.ring
    s._check(value)
    i = ring.index[generator]
    inverse = None
    powers: dict[int, TruncatedSeries] = {}
    out = ring.zero()
    buckets: dict[int, dict] = {}
    for m, c in s.terms.items():
        d = dict(m)
        e = d.pop(i, 0)
        buckets.setdefault(e, {})[tuple(sorted(d.items()))] = c
    for e, rest_terms in sorted(buckets.items()):
        rest = TruncatedSeries(ring, rest_terms)
        if e >= 0:
            p = powers.get(e)
            if p is None:
                p = powers[e] = value ** e
        else:
            if inverse is None:
                inverse = _monomial_inverse(value)
            p = inverse ** (-e)
        out = out + rest * p
    return out


def negate_z(s: TruncatedSeries) -> TruncatedSeries:
    """z -> -z (fast path of :func:`substitute`)."""
    ring = s.ring
    if not ring.has("z"):
        return s
    iz = ring.index["z"]
    out = {}
    for m, c in s.terms.items():
        e = dict(m).get(iz, 0)
        out[m] = -c if e % 2 else c
    return TruncatedSeries(ring, out)


def _monomial_inverse(value: TruncatedSeries) -> TruncatedSeries:
    if len(value.terms) != 1:
        raise NonInvertibleSubstitution("substituting into a negative power needs a single monomial")
    (m, c), = value.terms.items()
    inv = tuple((i, -e) for i, e in m)
    if not value.ring.admissible(inv):
        raise NonInvertibleSubstitution(f"inverse of {value.to_text()} leaves the truncation policy")
    return TruncatedSeries(value.ring, {inv: 1 / c})


def _nilpotency_cap(ring: SeriesRing) -> int:
    p = ring.policy
    n_psi = sum(1 for k in ring.kinds if k is PSI)
    return p.max_t_degree + p.max_u_degree + p.max_lambda_degree + (p.z_max - p.z_min) + n_psi * p.z_max + 2


def _power_sum(s: TruncatedSeries, coeff) -> TruncatedSeries:
    """sum_{k>=1} coeff(k) * s**k, stopping once s**k truncates to zero."""
    if s.constant_term():
        raise ValueError("series must have zero constant term")
    out = s.ring.zero()
    power = s
    for k in range(1, _nilpotency_cap(s.ring) + 1):
        if power.is_zero:
            return out
        out = out + power.scale(coeff(k))
        power = power * s
    if power.is_zero:
        return out
    raise ValueError("series is not nilpotent within the truncation policy")


def series_log1p(s: TruncatedSeries) -> TruncatedSeries:
    """log(1 + s) for s without constant term."""
    return _power_sum(s, lambda k: Fraction((-1) ** (k + 1), k))


def series_expm1(s: TruncatedSeries) -> TruncatedSeries:
    """exp(s) - 1 for s without constant term."""
    return _power_sum(s, lambda k: Fraction(1, factorial(k)))


def series_exp(s: TruncatedSeries) -> TruncatedSeries:
    return series_expm1(s) + 1


def series_inverse(s: TruncatedSeries) -> TruncatedSeries:
    """1/s for s with nonzero constant term and nilpotent remainder."""
    c0 = s.constant_term()
    if not c0:
        raise ValueError("series without constant term is not invertible")
    rest = (s - c0).scale(Fraction(1) / c0)
    return (_power_sum(rest, lambda k: (-1) ** k) + 1).scale(Fraction(1) / c0)
