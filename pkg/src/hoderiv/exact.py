"""Exact arithmetic: rationals, sparse polynomials over Q, dense Q-matrices.

Scalars are :class:`fractions.Fraction`; nothing in the package ever touches a
float.  The ring every other module works in is ``Q[t1, ..., tm]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Literal, Mapping, Sequence, Union

Scalar = Union[int, Fraction]
Exponents = tuple[int, ...]

__all__ = [
    "Fraction",
    "Poly",
    "QMatrix",
    "SolveResult",
    "binom",
    "fmt_q",
    "monomials",
    "poly_arith",
    "qmat_solve",
    "rref",
]


def fmt_q(value: Scalar) -> str:
    """Render a rational as ``3``, ``-1/3``."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def binom(n: int, k: int) -> Fraction:
    """Binomial coefficient C(n, k) as an exact rational; zero when k > n."""
    if n < 0 or k < 0:
        raise ValueError("binom requires nonnegative arguments")
    return Fraction(math.comb(n, k))


class Poly:
    """Sparse polynomial over Q in ``arity`` variables.

    Terms map exponent tuples to nonzero :class:`Fraction` coefficients.
    Instances are immutable and hashable, so they can key caches.
    """

    __slots__ = ("arity", "_terms", "_hash")

    def __init__(self, terms: Mapping[Exponents, Scalar] | None = None, arity: int = 1):
        if arity < 1:
            raise ValueError("arity must be at least 1")
        clean: dict[Exponents, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != arity:
                raise ValueError(f"monomial {exps} does not have arity {arity}")
            if any(e < 0 for e in exps):
                raise ValueError("negative exponent")
            coeff = Fraction(coeff)
            if coeff:
                clean[exps] = clean.get(exps, Fraction(0)) + coeff
                if not clean[exps]:
                    del clean[exps]
        self.arity = arity
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, terms: dict[Exponents, Fraction], arity: int) -> "Poly":
        # terms already normalized by the caller
        obj = cls.__new__(cls)
        obj.arity = arity
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, value: Scalar, arity: int = 1) -> "Poly":
        return cls({(0,) * arity: value}, arity)

    @classmethod
    def zero(cls, arity: int = 1) -> "Poly":
        return cls._raw({}, arity)

    @classmethod
    def one(cls, arity: int = 1) -> "Poly":
        return cls.constant(1, arity)

    @classmethod
    def var(cls, index: int, arity: int = 1) -> "Poly":
        """The variable ``t_index`` (1-based)."""
        if not 1 <= index <= arity:
            raise ValueError(f"variable t{index} outside arity {arity}")
        exps = [0] * arity
        exps[index - 1] = 1
        return cls({tuple(exps): 1}, arity)

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: Scalar = 1) -> "Poly":
        return cls({tuple(exps): coeff}, len(exps))

    @property
    def terms(self) -> Mapping[Exponents, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[Exponents, Fraction]]:
        """Terms in canonical (graded lexicographic, descending) order."""
        for exps in sorted(self._terms, key=_grlex_key, reverse=True):
            yield exps, self._terms[exps]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self._terms), default=-1)

    def coeff(self, exps: Sequence[int]) -> Fraction:
        return self._terms.get(tuple(exps), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.coeff((0,) * self.arity)

    def _coerce(self, other: "Poly | Scalar") -> "Poly":
        if isinstance(other, Poly):
            if other.arity != self.arity:
                raise ValueError(f"arity mismatch: {self.arity} vs {other.arity}")
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other, self.arity)
        return NotImplemented

    def __add__(self, other: "Poly | Scalar") -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self._terms)
        for exps, c in other._terms.items():
            s = out.get(exps, 0) + c
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        return Poly._raw(out, self.arity)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly._raw({e: -c for e, c in self._terms.items()}, self.arity)

    def __sub__(self, other: "Poly | Scalar") -> "Poly":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "Poly":
        return (-self) + other

    def __mul__(self, other: "Poly | Scalar") -> "Poly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return Poly.zero(self.arity)
            return Poly._raw({e: c * other for e, c in self._terms.items()}, self.arity)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, 0) + c1 * c2
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return Poly._raw(out, self.arity)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power")
        result = Poly.one(self.arity)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def diff(self, index: int) -> "Poly":
        """Partial derivative with respect to ``t_index`` (1-based)."""
        i = index - 1
        if not 0 <= i < self.arity:
            raise ValueError(f"variable t{index} outside arity {self.arity}")
        out: dict[Exponents, Fraction] = {}
        for exps, c in self._terms.items():
            if exps[i]:
                new = exps[:i] + (exps[i] - 1,) + exps[i + 1:]
                out[new] = out.get(new, 0) + c * exps[i]
        return Poly._raw({e: c for e, c in out.items() if c}, self.arity)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly):
            return self.arity == other.arity and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Poly.constant(other, self.arity)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Poly({str(self)!r}, arity={self.arity})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = _var_names(self.arity)
        pieces = []
        for exps, c in self.items():
            factors = []
            for name, e in zip(names, exps):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            mono = "*".join(factors)
            mag = abs(c)
            if not mono:
                body = fmt_q(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{fmt_q(mag)}*{mono}"
            pieces.append(("-" if c < 0 else "+", body))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out


def _grlex_key(exps: Exponents) -> tuple[int, Exponents]:
    return sum(exps), exps


def _var_names(arity: int) -> list[str]:
    if arity == 1:
        return ["t"]
    return [f"t{i}" for i in range(1, arity + 1)]


def poly_arith(kind: Literal["add", "sub", "mul"], a: Poly, b: Poly) -> Poly:
    if a.arity != b.arity:
        raise ValueError(f"arity mismatch: {a.arity} vs {b.arity}")
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    raise ValueError(f"unknown operation {kind!r}")


def monomials(arity: int, max_degree: int) -> list[Poly]:
    """All monic monomials of total degree <= max_degree, lowest degree first."""
    out = []
    for deg in range(max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(arity), deg):
            exps = [0] * arity
            for i in combo:
                exps[i] += 1
            out.append(Poly.monomial(exps))
    return out


class QMatrix:
    """Dense, immutable matrix of rationals."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Iterable[Scalar]]):
        rows = tuple(tuple(Fraction(x) for x in row) for row in data)
        if not rows or not rows[0]:
            raise ValueError("QMatrix needs at least one row and column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        self._data = rows
        self.rows = len(rows)
        self.cols = len(rows[0])

    @classmethod
    def identity(cls, n: int) -> "QMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QMatrix":
        return cls([[0] * cols for _ in range(rows)])

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def column(self, j: int) -> tuple[Fraction, ...]:
        return tuple(r[j] for r in self._data)

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def transpose(self) -> "QMatrix":
        return QMatrix(zip(*self._data))

    def __add__(self, other: "QMatrix") -> "QMatrix":
        self._same_shape(other)
        return QMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "QMatrix") -> "QMatrix":
        self._same_shape(other)
        return QMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __neg__(self) -> "QMatrix":
        return QMatrix([[-a for a in r] for r in self._data])

    def __mul__(self, scalar: Scalar) -> "QMatrix":
        return QMatrix([[a * scalar for a in r] for r in self._data])

    __rmul__ = __mul__

    def __matmul__(self, other: "QMatrix") -> "QMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        cols = other.transpose()._data
        return QMatrix([[sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self._data])

    def apply(self, vec: Sequence[Scalar]) -> tuple[Fraction, ...]:
        if len(vec) != self.cols:
            raise ValueError("vector length does not match column count")
        return tuple(sum((a * Fraction(v) for a, v in zip(r, vec)), Fraction(0)) for r in self._data)

    def power(self, k: int) -> "QMatrix":
        """Exact k-th power by repeated squaring."""
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        if k < 0:
            raise ValueError("negative power")
        result = QMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def _same_shape(self, other: "QMatrix") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(fmt_q(x) for x in r) + "]" for r in self._data)
        return f"QMatrix([{body}])"


def rref(rows: Sequence[Sequence[Scalar]], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form by exact Gauss-Jordan elimination.

    Returns the nonzero rows of the reduced matrix and the pivot column of each.
    Pivots are chosen left to right, so columns further right become the free
    parameters.
    """
    m = [[Fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


@dataclass(frozen=True)
class SolveResult:
    """Outcome of :func:`qmat_solve`.

    ``kind`` is ``"unique"``, ``"affine"`` (particular solution plus kernel
    basis) or ``"inconsistent"``.
    """

    kind: Literal["unique", "affine", "inconsistent"]
    particular: tuple[Fraction, ...] | None = None
    kernel: tuple[tuple[Fraction, ...], ...] = ()


def qmat_solve(a: QMatrix, b: Sequence[Scalar]) -> SolveResult:
    if a.rows != len(b):
        raise ValueError("right-hand side length does not match row count")
    aug = [list(a.row(i)) + [Fraction(b[i])] for i in range(a.rows)]
    reduced, pivots = rref(aug, a.cols + 1)
    if a.cols in pivots:
        return SolveResult("inconsistent")
    x = [Fraction(0)] * a.cols
    for row, pc in zip(reduced, pivots):
        x[pc] = row[a.cols]
    free = [c for c in range(a.cols) if c not in pivots]
    kernel = []
    for fc in free:
        v = [Fraction(0)] * a.cols
        v[fc] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v[pc] = -row[fc]
        kernel.append(tuple(v))
    if not kernel:
        return SolveResult("unique", tuple(x))
    return SolveResult("affine", tuple(x), tuple(kernel))
