"""Translated equation families, the transfer matrix and the descending solver.

For a full-form equation ``sum_q x^(L-q) F_q(x^q) = 0`` the translated family
``Phi(x,..,x,cx) - x*Phi(x,..,x,c)`` is again of that shape in the variable x,
with slot functions ``G = M F`` (plus a ``x^L (sum G)(c)`` correction).  The
matrix M is upper bidiagonal; its eigenvalue-1 projection picks out the
alternating binomial combination, which drives the descending solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .derivations import AdditiveMap
from .equation import EquationSpec, FnSymbol
from .exact import Poly, QMatrix, binom, fmt_q, qmat_solve
from .multiadditive import symmetrize
from . import solver

__all__ = [
    "DescentStep",
    "TransferMatrix",
    "TranslatedFamily",
    "derive_transfer_matrix",
    "descending_basis",
    "descending_solve",
    "descending_trace",
    "exponential_residual",
    "limit_matrix",
    "matrix_power",
    "rational_roots",
    "render_matrix",
    "transfer_matrix",
    "translate_family",
]


@dataclass(frozen=True)
class TransferMatrix:
    n: int
    matrix: QMatrix

    def __matmul__(self, other):
        other = other.matrix if isinstance(other, TransferMatrix) else other
        return self.matrix @ other

    def __eq__(self, other: object) -> bool:
        if isinstance(other, TransferMatrix):
            return self.n == other.n and self.matrix == other.matrix
        if isinstance(other, QMatrix):
            return self.matrix == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.matrix)


def transfer_matrix(n: int) -> TransferMatrix:
    """Size n+1: ``(j,j) = j/(n+1)``, ``(j,j+1) = -(j+1)/(n+1)``, last diagonal 1."""
    if n < 1:
        raise ValueError("n must be positive")
    size = n + 1
    rows = [[Fraction(0)] * size for _ in range(size)]
    for j in range(1, size):
        rows[j - 1][j - 1] = Fraction(j, size)
        rows[j - 1][j] = Fraction(-(j + 1), size)
    rows[n][n] = Fraction(1)
    return TransferMatrix(n, QMatrix(rows))


def matrix_power(m: QMatrix | TransferMatrix, k: int) -> QMatrix:
    if isinstance(m, TransferMatrix):
        m = m.matrix
    return m.power(k)


def limit_matrix(n: int) -> QMatrix:
    """Projection onto the eigenvalue-1 eigenspace of ``transfer_matrix(n)``.

    Built from the right eigenvector (normalized to last entry 1) and the left
    eigenvector, both obtained by exact elimination.
    """
    m = transfer_matrix(n).matrix
    size = n + 1
    ident = QMatrix.identity(size)
    right = qmat_solve(m - ident, [0] * size).kernel
    left = qmat_solve((m - ident).transpose(), [0] * size).kernel
    if len(right) != 1 or len(left) != 1:
        raise ArithmeticError("eigenvalue 1 is not simple")
    v = [c / right[0][-1] for c in right[0]]
    w = list(left[0])
    scale = sum((a * b for a, b in zip(w, v)), Fraction(0))
    return QMatrix([[vi * wj / scale for wj in w] for vi in v])


# -- translated family ---------------------------------------------------------

# atom: coeff * x^x_out * c^c_out * fn(x^x_in * c^c_in)
Atom = tuple[FnSymbol, int, int, int, int]


def _family_atoms(spec: EquationSpec) -> dict[Atom, Fraction]:
    """Expand ``Phi(x,..,x,cx) - x*Phi(x,..,x,c)`` by subset enumeration."""
    sym = symmetrize(spec)
    l = sym.arity
    acc: dict[Atom, Fraction] = {}

    def add(key: Atom, c: Fraction) -> None:
        acc[key] = acc.get(key, Fraction(0)) + c
        if not acc[key]:
            del acc[key]

    # argument j contributes (x exponent, c exponent); the last slot is the translated one
    first = [(1, 0)] * (l - 1) + [(1, 1)]
    second = [(1, 0)] * (l - 1) + [(0, 1)]
    for t in sym.terms:
        w = t.coeff / binom(l, t.p)
        for subset in itertools.combinations(range(l), t.p):
            for args, sign, shift in ((first, 1, 0), (second, -1, 1)):
                xo = sum(args[j][0] for j in subset) + shift
                co = sum(args[j][1] for j in subset)
                xi = sum(args[j][0] for j in range(l) if j not in subset)
                ci = sum(args[j][1] for j in range(l) if j not in subset)
                add((t.fn, xo, co, xi, ci), w * sign)
    return acc


@dataclass(frozen=True)
class TranslatedFamily:
    """Symbolic two-variable identity in (x, c)."""

    degree: int
    atoms: tuple[tuple[Atom, Fraction], ...]

    def as_dict(self) -> dict[Atom, Fraction]:
        return dict(self.atoms)

    def evaluate(self, assignment: Mapping[FnSymbol, AdditiveMap], x: Poly, c: Poly) -> Poly:
        out = Poly.zero(x.arity)
        for (fn, xo, co, xi, ci), k in self.atoms:
            out = out + (x ** xo) * (c ** co) * assignment[fn]((x ** xi) * (c ** ci)) * k
        return out

    def slot_functions(self) -> dict[int, dict[FnSymbol, Fraction]]:
        """``G_j`` for the atoms ``x^(L-j) G_j(c x^j)``; key 0 holds ``x^L G_0(c)``."""
        out: dict[int, dict[FnSymbol, Fraction]] = {}
        for (fn, xo, co, xi, ci), k in self.atoms:
            if co != 0 or ci != 1 or xo + xi != self.degree:
                raise ValueError("atoms outside the translated shape")
            out.setdefault(xi, {})[fn] = k
        return out

    def __str__(self) -> str:
        if not self.atoms:
            return "0"

        def power(name: str, e: int) -> str:
            return "" if e == 0 else name if e == 1 else f"{name}^{e}"

        pieces = []
        for (fn, xo, co, xi, ci), k in sorted(self.atoms, key=lambda a: (a[0][1], a[0][0], a[0][2])):
            inner = "*".join(filter(None, [power("c", ci), power("x", xi)])) or "1"
            outer = "*".join(filter(None, [power("x", xo), power("c", co)]))
            body = f"{outer}*{fn}({inner})" if outer else f"{fn}({inner})"
            mag = abs(k)
            if mag != 1:
                body = f"{fmt_q(mag)}*{body}"
            pieces.append(("-" if k < 0 else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out


def translate_family(spec: EquationSpec | solver.CanonicalEquation) -> TranslatedFamily:
    if isinstance(spec, solver.CanonicalEquation):
        spec = spec.spec
    if not spec.terms:
        raise ValueError("empty equation")
    atoms = _family_atoms(spec)
    return TranslatedFamily(spec.degree, tuple(sorted(atoms.items())))


def derive_transfer_matrix(n: int) -> QMatrix:
    """Transfer matrix read off from the symbolic family of the generic full form."""
    size = n + 1
    spec = EquationSpec.of(*((1, size - q, q, f"F{q}") for q in range(1, size + 1)))
    slots = translate_family(spec).slot_functions()
    rows = []
    for j in range(1, size + 1):
        g = slots.get(j, {})
        rows.append([g.get(f"F{q}", Fraction(0)) for q in range(1, size + 1)])
    m = QMatrix(rows)
    # the x^L term must be minus the sum of all G_j
    g0 = slots.get(0, {})
    total = [sum(m.column(q), Fraction(0)) for q in range(size)]
    if [g0.get(f"F{q}", Fraction(0)) for q in range(1, size + 1)] != [-c for c in total]:
        raise ArithmeticError("translated family has an unexpected correction term")
    return m


# -- residual polynomial -------------------------------------------------------


def _divisors(k: int) -> list[int]:
    k = abs(k)
    small = [d for d in range(1, math.isqrt(k) + 1) if k % d == 0]
    return sorted(set(small + [k // d for d in small]))


def rational_roots(p: Poly) -> list[Fraction]:
    """Distinct rational roots of a univariate polynomial, ascending."""
    if p.arity != 1:
        raise ValueError("univariate polynomials only")
    if p.is_zero():
        raise ValueError("the zero polynomial has every root")
    coeffs = [p.coeff((e,)) for e in range(p.degree() + 1)]
    lcm = 1
    for c in coeffs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints = [int(c * lcm) for c in coeffs]
    roots = set()
    low = next(i for i, c in enumerate(ints) if c)
    if low:
        roots.add(Fraction(0))
    ints = ints[low:]
    if len(ints) > 1:
        for num in _divisors(ints[0]):
            for den in _divisors(ints[-1]):
                for cand in (Fraction(num, den), Fraction(-num, den)):
                    if sum(c * cand ** e for e, c in enumerate(ints)) == 0:
                        roots.add(cand)
    return sorted(roots)


def exponential_residual(coeffs: Sequence[Fraction | int]) -> tuple[Poly, list[Fraction]]:
    """``P(t) = sum_j j a_j t^(j-1)`` and its rational roots."""
    a = [Fraction(c) for c in coeffs]
    if not any(a):
        raise ValueError("all coefficients are zero")
    p = Poly({(j - 1,): j * c for j, c in enumerate(a, 1)}, 1)
    return p, rational_roots(p)


# -- descending process --------------------------------------------------------


@dataclass(frozen=True)
class DescentStep:
    """At ``level`` N the top slot ``F_{N+1}`` is ``sign * D_N`` and every
    lower slot becomes ``F~_j = F_j + shifts[j-1] * F_{N+1}``."""

    level: int
    sign: int
    shifts: tuple[Fraction, ...]


def descending_trace(n: int) -> list[DescentStep]:
    steps = []
    for level in range(n, 0, -1):
        v = limit_matrix(level).column(level)
        steps.append(DescentStep(level, (-1) ** (n - level), tuple(-c for c in v[:-1])))
    steps.append(DescentStep(0, (-1) ** n, ()))
    return steps


def descending_basis(n: int) -> QMatrix:
    """Same layout as :func:`solver.closed_form_basis`, built by the descending process.

    Each level fixes the top slot as a free derivation and removes its
    binomial combination from the lower slots; back substitution then
    expresses every original slot over ``D_0..D_n``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    # expr[j] = current slot F_j of the level being processed, as a vector over D_0..D_n,
    # minus the pieces not yet known; accumulate what each level contributes
    contrib = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]  # contrib[j-1][N]
    shift_so_far: list[list[tuple[int, Fraction]]] = [[] for _ in range(n + 1)]
    for step in descending_trace(n):
        top = step.level + 1
        contrib[top - 1][step.level] += step.sign
        for j, s in enumerate(step.shifts, 1):
            shift_so_far[j - 1].append((step.level, s))
    # F_j = F~_j - sum_N shift_N * F_{N+1}^{(N)}, and F_{N+1}^{(N)} = sign_N * D_N
    signs = {s.level: s.sign for s in descending_trace(n)}
    for j in range(1, n + 2):
        for level, s in shift_so_far[j - 1]:
            contrib[j - 1][level] -= s * signs[level]
    # row i holds f_{n+1-i}
    return QMatrix([contrib[n - i] for i in range(n + 1)])


def descending_solve(
    spec: EquationSpec,
    *,
    normalized: bool = False,
    degree_bound: int = 4,
    arity: int = 1,
) -> solver.SolutionStructure:
    """Solve full-form blocks with the descending basis; missing powers are rejected."""
    systems = []
    constraints = []
    degenerate = []
    for block in solver.split_homogeneous(spec):
        ce = solver.canonicalize(block)
        constraints.append(ce.constraint)
        if ce.degenerate:
            degenerate.append(ce.degree)
            continue
        if ce.missing:
            raise ValueError(f"degree {ce.degree} block is missing powers {list(ce.missing)}; reduce it first")
        systems.append(solver._System(ce.degree, ce.degree, ce.slots, descending_basis))
    structure = solver._assemble(spec.fns, systems, constraints, normalized, "descending", degenerate)
    if not solver.verify_structure(spec, structure, degree_bound=degree_bound, arity=arity):
        raise RuntimeError("descending solution failed verification")
    return structure


# -- display --------------------------------------------------------------------


def render_matrix(m: QMatrix, factor_out: bool = True) -> str:
    """Rows of entries; with ``factor_out`` a common denominator is pulled in front."""
    rows = m.tolist()
    den = 1
    if factor_out:
        for row in rows:
            for c in row:
                den = den * c.denominator // math.gcd(den, c.denominator)
    cells = [[fmt_q(c * den) for c in row] for row in rows]
    width = max((len(c) for row in cells for c in row), default=1)
    body = "\n".join("[ " + "  ".join(c.rjust(width) for c in row) + " ]" for row in cells)
    if den == 1:
        return body
    return f"1/{den} *\n{body}"
