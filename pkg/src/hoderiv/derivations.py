"""Derivations and differential operators on Q[t1..tm], and order certificates.

A :class:`BasicDerivation` is ``p -> sum_i c_i * dp/dt_i``.  A
:class:`DiffOperator` is a rational combination of composition words of basic
derivations; the empty word is the identity map.  Any callable ``Poly -> Poly``
is accepted wherever an additive map is expected.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

from .exact import Poly, Scalar, binom, fmt_q, monomials

AdditiveMap = Callable[[Poly], Poly]

__all__ = [
    "AdditiveMap",
    "BasicDerivation",
    "DiffOperator",
    "MapSum",
    "apply_operator",
    "defect",
    "leibniz_expand",
    "order_check",
    "order_counterexample",
    "order_identity",
    "parse_operator",
]


@dataclass(frozen=True)
class BasicDerivation:
    """The derivation ``p -> sum_i coeffs[i] * dp/dt_{i+1}``."""

    coeffs: tuple[Poly, ...]
    name: str | None = None

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("a derivation needs at least one coefficient")
        if any(c.arity != len(self.coeffs) for c in self.coeffs):
            raise ValueError("coefficient arity must equal the number of variables")

    @classmethod
    def partial(cls, index: int, arity: int = 1) -> "BasicDerivation":
        """``d/dt_index``, named ``d<index>``."""
        if not 1 <= index <= arity:
            raise ValueError(f"no variable t{index} in arity {arity}")
        coeffs = tuple(Poly.one(arity) if i == index else Poly.zero(arity) for i in range(1, arity + 1))
        return cls(coeffs, f"d{index}")

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def partial_index(self) -> int | None:
        """Index i if this is exactly d/dt_i, else None."""
        nonzero = [i for i, c in enumerate(self.coeffs, 1) if c]
        if len(nonzero) == 1 and self.coeffs[nonzero[0] - 1] == 1:
            return nonzero[0]
        return None

    def __call__(self, p: Poly) -> Poly:
        if p.arity != self.arity:
            raise ValueError(f"arity mismatch: {p.arity} vs {self.arity}")
        out = Poly.zero(self.arity)
        for i, c in enumerate(self.coeffs, 1):
            if c:
                out = out + c * p.diff(i)
        return out

    def __str__(self) -> str:
        if self.name:
            return self.name
        parts = []
        for i, c in enumerate(self.coeffs, 1):
            if c:
                parts.append(f"d{i}" if c == 1 else f"({c})*d{i}")
        return "[" + " + ".join(parts or ["0"]) + "]"


Word = tuple[BasicDerivation, ...]


@lru_cache(maxsize=200_000)
def _apply_word(word: Word, p: Poly) -> Poly:
    # words are compositions d_1 o d_2 o ... o d_k, applied right to left
    if not word:
        return p
    return word[0](_apply_word(word[1:], p))


@dataclass(frozen=True)
class DiffOperator:
    """Rational combination of composition words; the empty word is the identity."""

    terms: tuple[tuple[Fraction, Word], ...]
    arity: int = 1

    def __post_init__(self) -> None:
        merged: dict[Word, Fraction] = {}
        for scalar, word in self.terms:
            if any(d.arity != self.arity for d in word):
                raise ValueError("derivation arity does not match operator arity")
            merged[word] = merged.get(word, Fraction(0)) + Fraction(scalar)
        clean = tuple((s, w) for w, s in merged.items() if s)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def zero(cls, arity: int = 1) -> "DiffOperator":
        return cls((), arity)

    @classmethod
    def identity(cls, arity: int = 1) -> "DiffOperator":
        return cls(((Fraction(1), ()),), arity)

    @classmethod
    def of(cls, d: BasicDerivation) -> "DiffOperator":
        return cls(((Fraction(1), (d,)),), d.arity)

    @classmethod
    def power(cls, d: BasicDerivation, k: int) -> "DiffOperator":
        """``d^k``; ``d^0`` is the identity."""
        if k < 0:
            raise ValueError("negative power")
        return cls(((Fraction(1), (d,) * k),), d.arity)

    @property
    def order(self) -> int:
        return max((len(w) for _, w in self.terms), default=0)

    @property
    def includes_identity(self) -> bool:
        return any(not w for _, w in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, p: Poly) -> Poly:
        if p.arity != self.arity:
            raise ValueError(f"arity mismatch: {p.arity} vs {self.arity}")
        out = Poly.zero(self.arity)
        for scalar, word in self.terms:
            out = out + _apply_word(word, p) * scalar
        return out

    def _check(self, other: "DiffOperator") -> None:
        if other.arity != self.arity:
            raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        self._check(other)
        return DiffOperator(self.terms + other.terms, self.arity)

    def __neg__(self) -> "DiffOperator":
        return DiffOperator(tuple((-s, w) for s, w in self.terms), self.arity)

    def __sub__(self, other: "DiffOperator") -> "DiffOperator":
        return self + (-other)

    def __mul__(self, scalar: Scalar) -> "DiffOperator":
        return DiffOperator(tuple((s * scalar, w) for s, w in self.terms), self.arity)

    __rmul__ = __mul__

    def __matmul__(self, other: "DiffOperator") -> "DiffOperator":
        """Composition ``self o other``."""
        self._check(other)
        return DiffOperator(
            tuple((s1 * s2, w1 + w2) for s1, w1 in self.terms for s2, w2 in other.terms),
            self.arity,
        )

    def normalized(self) -> "DiffOperator":
        """Sort words made only of pure partials; those commute."""
        terms = []
        for s, w in self.terms:
            idx = [d.partial_index() for d in w]
            if all(i is not None for i in idx):
                w = tuple(d for _, d in sorted(zip(idx, w), key=lambda t: t[0]))
            terms.append((s, w))
        return DiffOperator(tuple(terms), self.arity)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        ordered = sorted(self.terms, key=lambda t: (len(t[1]), [str(d) for d in t[1]]))
        pieces = []
        for s, w in ordered:
            body = "∘".join(str(d) for d in w) if w else "id"
            mag = abs(s)
            text = body if mag == 1 else f"{fmt_q(mag)}*{body}"
            pieces.append(("-" if s < 0 else "+", text))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, text in pieces[1:]:
            out += f" {sign} {text}"
        return out


class MapSum:
    """Finite rational combination of arbitrary additive maps."""

    def __init__(self, parts: Iterable[tuple[Scalar, AdditiveMap]]):
        self.parts = tuple((Fraction(c), m) for c, m in parts if c)

    def __call__(self, p: Poly) -> Poly:
        out = Poly.zero(p.arity)
        for c, m in self.parts:
            out = out + m(p) * c
        return out


def apply_operator(op: DiffOperator, p: Poly) -> Poly:
    return op(p)


def defect(a: AdditiveMap, x: Poly, y: Poly) -> Poly:
    """``A(xy) - x A(y) - A(x) y``; identically zero exactly for derivations."""
    return a(x * y) - x * a(y) - a(x) * y


def leibniz_expand(d: BasicDerivation, k: int, x: Poly, y: Poly) -> Poly:
    """Right-hand side of the general Leibniz formula for ``d^k(xy)``."""
    xs = [x]
    ys = [y]
    for _ in range(k):
        xs.append(d(xs[-1]))
        ys.append(d(ys[-1]))
    out = Poly.zero(x.arity)
    for i in range(k + 1):
        out = out + xs[i] * ys[k - i] * binom(k, i)
    return out


def _prod(polys: Iterable[Poly], arity: int) -> Poly:
    out = Poly.one(arity)
    for p in polys:
        out = out * p
    return out


def order_identity(a: AdditiveMap, xs: Sequence[Poly]) -> Poly:
    """Left side of the (n+1)-variable identity characterizing order-n derivations.

    ``sum_i (-1)^i sum_{|I|=i, i<=n} (prod_{I} x_j) * A(prod_{not I} x_k)`` where
    ``n + 1 = len(xs)``.
    """
    arity = xs[0].arity
    k = len(xs)
    out = Poly.zero(arity)
    idx = range(k)
    for i in range(k):
        sign = -1 if i % 2 else 1
        for subset in itertools.combinations(idx, i):
            outside = _prod((xs[j] for j in subset), arity)
            inside = _prod((xs[j] for j in idx if j not in subset), arity)
            out = out + outside * a(inside) * sign
    return out


def order_counterexample(
    a: AdditiveMap, n: int, degree_bound: int, arity: int = 1
) -> tuple[Poly, ...] | None:
    """First monomial tuple violating the order-n identity, or None."""
    if n < 0 or degree_bound < 1:
        raise ValueError("need n >= 0 and degree_bound >= 1")
    monos = monomials(arity, degree_bound)
    # the identity is symmetric, so multisets suffice
    for xs in itertools.combinations_with_replacement(monos, n + 1):
        if order_identity(a, xs):
            return xs
    return None


def order_check(a: AdditiveMap, n: int, degree_bound: int = 4, arity: int = 1) -> bool:
    """Certify ``a`` as a derivation of order n on monomial tuples up to the bound."""
    return order_counterexample(a, n, degree_bound, arity) is None


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<name>d\d+|id)|(?P<op>[+\-*.∘]))")


def parse_operator(text: str, arity: int = 1) -> DiffOperator:
    """Parse ``"3/2*d1.d2 + d1"`` (``.`` or ``∘`` composes; ``id`` is the identity)."""
    text = text.strip()
    if text == "0":
        return DiffOperator.zero(arity)
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse operator {text!r} at offset {pos}")
        kind = m.lastgroup
        tokens.append((kind, m.group(kind)))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    terms: list[tuple[Fraction, Word]] = []
    i = 0
    sign = 1
    if tokens and tokens[0] == ("op", "-"):
        sign, i = -1, 1
    elif tokens and tokens[0] == ("op", "+"):
        i = 1
    while True:
        scalar = Fraction(sign)
        if i < len(tokens) and tokens[i][0] == "num":
            scalar *= Fraction(tokens[i][1])
            i += 1
            if i < len(tokens) and tokens[i] == ("op", "*"):
                i += 1
            else:
                terms.append((scalar, ()))
                scalar = None
        if scalar is not None:
            word: list[BasicDerivation] = []
            while True:
                if i >= len(tokens) or tokens[i][0] != "name":
                    raise ValueError(f"expected d<k> or id in operator {text!r}")
                name = tokens[i][1]
                i += 1
                if name != "id":
                    word.append(BasicDerivation.partial(int(name[1:]), arity))
                if i < len(tokens) and tokens[i][1] in (".", "∘"):
                    i += 1
                    continue
                break
            terms.append((scalar, tuple(word)))
        if i == len(tokens):
            break
        if tokens[i][1] not in "+-":
            raise ValueError(f"unexpected {tokens[i][1]!r} in operator {text!r}")
        sign = -1 if tokens[i][1] == "-" else 1
        i += 1
    return DiffOperator(tuple(terms), arity)
