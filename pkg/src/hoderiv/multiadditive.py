"""Symmetric multiadditive forms of univariate equations.

A homogeneous equation ``sum_k c_k x^p_k f_k(x^q_k) = 0`` of degree ``l`` has
the symmetric ``l``-additive companion

    Phi(x_1..x_l) = sum_k c_k / C(l, p_k) * sum_{|I| = p_k} (prod_I x_j) f_k(prod_{not I} x_i)

whose trace is the original left-hand side.  :class:`SymEquation` keeps only
the compact ``(coeff, p, fn)`` data; subsets are enumerated on evaluation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .derivations import AdditiveMap
from .equation import EquationSpec, EquationTerm, FnSymbol
from .exact import Poly, binom, fmt_q, monomials

__all__ = [
    "SymEquation",
    "SymTerm",
    "diagonalize",
    "difference_iterate",
    "polarization_check",
    "polarization_report",
    "substitute_ones",
    "symmetrize",
]


@dataclass(frozen=True)
class SymTerm:
    """``coeff / C(l, p) * sum_{|I|=p} (prod_I x) * fn(prod of the rest)``."""

    coeff: Fraction
    p: int
    fn: FnSymbol


@dataclass(frozen=True)
class SymEquation:
    arity: int
    terms: tuple[SymTerm, ...]

    def __post_init__(self) -> None:
        if self.arity < 0:
            raise ValueError("negative arity")
        merged: dict[tuple[int, FnSymbol], Fraction] = {}
        for t in self.terms:
            if not 0 <= t.p <= self.arity:
                raise ValueError(f"subset size {t.p} outside 0..{self.arity}")
            key = (t.p, t.fn)
            merged[key] = merged.get(key, Fraction(0)) + Fraction(t.coeff)
        clean = tuple(SymTerm(c, p, fn) for (p, fn), c in merged.items() if c)
        object.__setattr__(self, "terms", clean)

    def evaluate(
        self,
        assignment: Mapping[FnSymbol, AdditiveMap],
        xs: Sequence[Poly],
        ring_arity: int | None = None,
    ) -> Poly:
        if len(xs) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(xs)}")
        m = xs[0].arity if xs else (ring_arity or 1)
        out = Poly.zero(m)
        idx = range(self.arity)
        for t in self.terms:
            fn = assignment[t.fn]
            weight = t.coeff / binom(self.arity, t.p)
            for subset in itertools.combinations(idx, t.p):
                outside = Poly.one(m)
                inside = Poly.one(m)
                for j in idx:
                    if j in subset:
                        outside = outside * xs[j]
                    else:
                        inside = inside * xs[j]
                out = out + outside * fn(inside) * weight
        return out

    def __str__(self) -> str:
        """Display with denominators cleared, e.g. ``3 f(x1x2x3) + x1x2 g(x3) + ...``."""
        if not self.terms:
            return "0"
        weights = [t.coeff / binom(self.arity, t.p) for t in self.terms]
        lcm = 1
        for w in weights:
            lcm = lcm * w.denominator // math.gcd(lcm, w.denominator)
        pieces = []
        names = [f"x{i}" for i in range(1, self.arity + 1)]
        for t, w in zip(self.terms, weights):
            c = w * lcm
            for subset in itertools.combinations(range(self.arity), t.p):
                outside = "".join(names[j] for j in subset)
                inside = "".join(names[j] for j in range(self.arity) if j not in subset) or "1"
                mag = abs(c)
                body = f"{outside} {t.fn}({inside})" if outside else f"{t.fn}({inside})"
                if mag != 1:
                    body = f"{fmt_q(mag)} {body}"
                pieces.append(("-" if c < 0 else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out


def symmetrize(spec: EquationSpec) -> SymEquation:
    if not spec.terms:
        raise ValueError("cannot symmetrize an empty equation")
    if not spec.is_homogeneous():
        raise ValueError("symmetrize needs a homogeneous equation")
    return SymEquation(spec.degree, tuple(SymTerm(t.coeff, t.p, t.fn) for t in spec.terms))


def diagonalize(sym: SymEquation) -> EquationSpec:
    """Trace: set every argument equal to x."""
    return EquationSpec(tuple(EquationTerm(t.coeff, t.p, sym.arity - t.p, t.fn) for t in sym.terms))


def substitute_ones(sym: SymEquation, s: int) -> SymEquation:
    """Set ``s`` of the arguments to 1, assuming every function vanishes at 1.

    A term with outer subset size p splits by the number i of ones that land in
    the outer product: it contributes weight ``C(s,i) C(l-s,p-i) / C(l,p)`` at
    outer size ``p - i`` with ``q - s + i`` factors inside, and drops out when
    nothing real is left inside.
    """
    l = sym.arity
    if not 0 <= s < l:
        raise ValueError(f"need 0 <= s < {l}, got {s}")
    if s == 0:
        return sym
    rest = l - s
    out = []
    for t in sym.terms:
        q = l - t.p
        for i in range(max(0, t.p - rest), min(s, t.p) + 1):
            if q - s + i == 0:
                continue
            w = t.coeff * binom(s, i) * binom(rest, t.p - i) / binom(l, t.p)
            out.append(SymTerm(w, t.p - i, t.fn))
    return SymEquation(rest, tuple(out))


def difference_iterate(trace: Callable[[Poly], Poly], ys: Sequence[Poly], x: Poly) -> Poly:
    """``Delta_{y_1} ... Delta_{y_r} trace(x)`` by inclusion-exclusion."""
    r = len(ys)
    out = Poly.zero(x.arity)
    for k in range(r + 1):
        sign = -1 if (r - k) % 2 else 1
        for subset in itertools.combinations(ys, k):
            shift = x
            for y in subset:
                shift = shift + y
            out = out + trace(shift) * sign
    return out


def polarization_report(a: AdditiveMap, n: int, degree_bound: int = 4, arity: int = 1) -> dict[str, bool]:
    """Check the polarization identities for ``A(x_1..x_n) = prod a(x_i)``.

    Keys: ``mixed`` (n distinct increments give n! A(y_1..y_n)), ``diagonal``
    (n equal increments give n! A*(y)), ``vanishing`` (n+1 increments give 0).
    """
    if n < 1:
        raise ValueError("n must be positive")
    fact = math.factorial(n)

    def trace(x: Poly) -> Poly:
        return a(x) ** n

    monos = monomials(arity, degree_bound)
    mixed = diagonal = vanishing = True
    for x in monos:
        for ys in itertools.combinations_with_replacement(monos, n):
            expected = Poly.one(arity)
            for y in ys:
                expected = expected * a(y)
            if difference_iterate(trace, ys, x) != expected * fact:
                mixed = False
        for y in monos:
            if difference_iterate(trace, [y] * n, x) != trace(y) * fact:
                diagonal = False
        for ys in itertools.combinations_with_replacement(monos, n + 1):
            if difference_iterate(trace, ys, x):
                vanishing = False
    return {"mixed": mixed, "diagonal": diagonal, "vanishing": vanishing}


def polarization_check(a: AdditiveMap, n: int, degree_bound: int = 4, arity: int = 1) -> bool:
    return all(polarization_report(a, n, degree_bound, arity).values())
