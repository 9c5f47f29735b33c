"""Univariate equations ``sum_k c_k x^p_k f_k(x^q_k) = 0``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

FnSymbol = str


@dataclass(frozen=True)
class EquationTerm:
    coeff: Fraction
    p: int
    q: int
    fn: FnSymbol

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        if not self.coeff:
            raise ValueError("equation terms carry nonzero coefficients")
        if self.p < 0 or self.q < 0:
            raise ValueError("exponents must be nonnegative")

    @property
    def degree(self) -> int:
        return self.p + self.q


@dataclass(frozen=True)
class EquationSpec:
    """Terms kept sorted by ``p`` (stable, so input order breaks ties)."""

    terms: tuple[EquationTerm, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(sorted(self.terms, key=lambda t: t.p)))

    @classmethod
    def of(cls, *terms: tuple) -> "EquationSpec":
        """Shorthand: ``EquationSpec.of((1, 0, 3, "f"), (1, 2, 1, "g"))``."""
        return cls(tuple(EquationTerm(Fraction(c), p, q, fn) for c, p, q, fn in terms))

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def fns(self) -> tuple[FnSymbol, ...]:
        """Function symbols in order of first appearance."""
        return tuple(dict.fromkeys(t.fn for t in self.terms))

    def degrees(self) -> tuple[int, ...]:
        return tuple(dict.fromkeys(t.degree for t in self.terms))

    def is_homogeneous(self) -> bool:
        return len(set(self.degrees())) <= 1

    @property
    def degree(self) -> int:
        degs = set(self.degrees())
        if len(degs) != 1:
            raise ValueError("equation is not homogeneous")
        return degs.pop()

    def scaled(self, factor: Fraction | int) -> "EquationSpec":
        if not factor:
            raise ValueError("scaling by zero")
        return EquationSpec(tuple(EquationTerm(t.coeff * factor, t.p, t.q, t.fn) for t in self.terms))

    def primitive(self) -> "EquationSpec":
        """Scale to coprime integer coefficients (sign preserved)."""
        if not self.terms:
            return self
        return self.scaled(primitive_factor(t.coeff for t in self.terms))

    def collected(self) -> "EquationSpec":
        """Merge terms sharing ``(p, q, fn)``; drop those that cancel."""
        acc: dict[tuple[int, int, FnSymbol], Fraction] = {}
        for t in self.terms:
            key = (t.p, t.q, t.fn)
            acc[key] = acc.get(key, Fraction(0)) + t.coeff
        return EquationSpec(tuple(EquationTerm(c, p, q, fn) for (p, q, fn), c in acc.items() if c))


def primitive_factor(coeffs: Iterable[Fraction]) -> Fraction:
    """Factor turning the given rationals into coprime integers."""
    coeffs = [Fraction(c) for c in coeffs if c]
    if not coeffs:
        return Fraction(1)
    lcm = 1
    for c in coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    g = 0
    for c in coeffs:
        g = math.gcd(g, (c * lcm).numerator)
    return Fraction(lcm, g)
