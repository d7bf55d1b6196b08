"""Fermat model data, insertion profiles and closed-form scalar invariants."""

from __future__ import annotations

import enum
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ModelError(ValueError):
    pass


class InconsistentGammaError(ValueError):
    """The insertion profile is incompatible with the model (selection rule fails)."""


def frac(x: Fraction) -> Fraction:
    """Fractional part <x> = x - floor(x)."""
    return x - math.floor(x)


@dataclass(frozen=True)
class ModelSpec:
    r: int
    weights: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if self.r < 2:
            raise ModelError("r must be at least 2")
        if not self.weights:
            raise ModelError("at least one weight is required")
        for w in self.weights:
            if w <= 0 or self.r % w or self.r // w < 2:
                raise ModelError(f"r/w must be an integer >= 2 (r={self.r}, w={w})")
        if math.gcd(self.r, *self.weights) != 1:
            raise ModelError("gcd(r, w_1, ..., w_s) must be 1")

    @property
    def s(self) -> int:
        return len(self.weights)

    @cached_property
    def charges(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(w, self.r) for w in self.weights)

    @property
    def q(self) -> Fraction:
        return sum(self.charges, Fraction(0))

    @property
    def is_calabi_yau(self) -> bool:
        return self.q == 1

    def exponents(self) -> tuple[int, ...]:
        """Exponents r/w of the Fermat polynomial."""
        return tuple(self.r // w for w in self.weights)

    def polynomial(self) -> str:
        return " + ".join(f"X{i}^{e}" for i, e in enumerate(self.exponents(), 1))

    def to_dict(self) -> dict:
        return {"r": self.r, "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, data: dict) -> "ModelSpec":
        try:
            return cls(int(data["r"]), tuple(data["weights"]))
        except KeyError as exc:
            raise ModelError(f"model file is missing {exc.args[0]!r}") from None

    @classmethod
    def load(cls, path: str | Path) -> "ModelSpec":
        path = Path(path)
        text = path.read_text()
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
        return cls.from_dict(data)


def quintic() -> ModelSpec:
    return ModelSpec(5, (1, 1, 1, 1, 1))


def r_spin(r: int) -> ModelSpec:
    return ModelSpec(r, (1,))


def canonical_state(a: int, r: int) -> int:
    """Representative of a mod r in 1..r."""
    a %= r
    return a or r


@dataclass(frozen=True)
class GammaType:
    heavy: tuple[int, ...] = ()
    light: tuple[int, ...] = ()
    genus: int = 0

    def __post_init__(self):
        object.__setattr__(self, "heavy", tuple(self.heavy))
        object.__setattr__(self, "light", tuple(self.light))
        if self.genus < 0:
            raise ValueError("genus must be nonnegative")

    @classmethod
    def normalized(cls, r: int, heavy: Iterable[int] = (), light: Iterable[int] = (), genus: int = 0):
        return cls(
            tuple(canonical_state(a, r) for a in heavy),
            tuple(canonical_state(b, r) for b in light),
            genus,
        )

    @property
    def m(self) -> int:
        return len(self.heavy)

    @property
    def n(self) -> int:
        return len(self.light)

    @property
    def euler(self) -> int:
        """2g - 2 + m."""
        return 2 * self.genus - 2 + self.m

    @property
    def nonnegative_euler(self) -> bool:
        return self.euler >= 0

    @property
    def nonempty(self) -> bool:
        return (self.euler, self.n) != (0, 0)

    @property
    def stable(self) -> bool:
        return self.nonnegative_euler and self.nonempty

    def check_range(self, r: int):
        for x in self.heavy + self.light:
            if not 1 <= x <= r:
                raise ValueError(f"state {x} outside 1..{r}")

    def __str__(self):
        return f"g={self.genus};{','.join(map(str, self.heavy))}|{','.join(map(str, self.light))}"


def parse_gamma(text: str, r: int | None = None) -> GammaType:
    """Parse ``"g=G;a1,a2|b1,b2"``; the ``g=`` part is optional (default genus 0)."""
    genus = 0
    body = text.strip()
    if body.startswith("g="):
        head, sep, body = body.partition(";")
        if not sep:
            raise ValueError(f"expected ';' after genus in {text!r}")
        genus = int(head[2:])
    if "|" not in body:
        raise ValueError(f"expected 'heavy|light' in {text!r}")
    left, right = body.split("|", 1)

    def ints(part: str) -> list[int]:
        return [int(x) for x in part.replace(" ", "").split(",") if x]

    heavy, light = ints(left), ints(right)
    if r is not None:
        return GammaType.normalized(r, heavy, light, genus)
    return GammaType(tuple(heavy), tuple(light), genus)


def _fractional_sum(model: ModelSpec, gamma: GammaType) -> Fraction:
    total = Fraction(0)
    for q in model.charges:
        for x in gamma.heavy + gamma.light:
            total += frac(q * (x - 1))
    return total


def selection_rule(model: ModelSpec, gamma: GammaType) -> bool:
    """2g - 2 + sum(1 - a_i) + sum(1 - b_j) == 0 mod r."""
    total = 2 * gamma.genus - 2 + sum(1 - a for a in gamma.heavy) + sum(1 - b for b in gamma.light)
    return total % model.r == 0


def virtual_dimension(model: ModelSpec, gamma: GammaType, master: bool = False) -> Fraction:
    gamma.check_range(model.r)
    d = (3 - model.s + 2 * model.q) * (gamma.genus - 1) + gamma.m + gamma.n + (1 if master else 0)
    d -= _fractional_sum(model, gamma)
    if d.denominator != 1:
        raise InconsistentGammaError(f"non-integral virtual dimension {d} for {gamma}")
    return d


def epsilon_exponent(model: ModelSpec, gamma: GammaType) -> Fraction:
    return (2 * model.q - model.s) * (gamma.genus - 1) - _fractional_sum(model, gamma)


def epsilon_gamma(model: ModelSpec, gamma: GammaType) -> Fraction:
    """Normalisation constant r^(1-g) * (-1)^((2q-s)(g-1) - sum of fractional parts)."""
    gamma.check_range(model.r)
    e = epsilon_exponent(model, gamma)
    if e.denominator != 1:
        raise InconsistentGammaError(f"non-integral sign exponent {e} for {gamma}")
    sign = -1 if e.numerator % 2 else 1
    return sign * Fraction(model.r) ** (1 - gamma.genus)


class StateKind(str, enum.Enum):
    NARROW = "narrow"
    BROAD = "broad"


def classify_state(model: ModelSpec, a: int) -> StateKind:
    if not 1 <= a <= model.r:
        raise ValueError(f"state {a} outside 1..{model.r}")
    if all((a * q).denominator != 1 for q in model.charges):
        return StateKind.NARROW
    return StateKind.BROAD


def is_narrow(model: ModelSpec, a: int) -> bool:
    return classify_state(model, a) is StateKind.NARROW


def dual_state(a: int, r: int) -> int:
    """a' in 1..r with a + a' == 0 mod r (the pairing phi^a = phi_a')."""
    return canonical_state(-a, r)


def narrow_states(model: ModelSpec) -> list[int]:
    return [a for a in range(1, model.r + 1) if is_narrow(model, a)]
