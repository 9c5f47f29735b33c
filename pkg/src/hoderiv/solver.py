"""Solve ``sum_k c_k x^p_k f_k(x^q_k) = 0`` for additive unknowns.

Pipeline: split into homogeneous blocks, canonicalize each block into slot
functions (rational combinations of the unknowns, one per inner power q),
eliminate missing powers by substituting ones into the symmetric form, apply
the closed-form derivation basis, and recover the original unknowns by exact
elimination.  Every structure is checked against the multiadditive form on
monomial tuples before it is returned.

Each unknown is split as ``f = f(1)*x + f~`` with ``f~(1) = 0``.  The ``f(1)``
values only have to satisfy one linear relation per block; the ``f~`` parts
are expressed over free symbols ``D_i`` (an arbitrary derivation of order i)
and, when the equation leaves a combination of unknowns untouched, ``A_r``
(an arbitrary additive map vanishing at 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Mapping, Sequence

from .derivations import AdditiveMap, BasicDerivation, DiffOperator, MapSum, order_check
from .equation import EquationSpec, EquationTerm, FnSymbol, primitive_factor
from .exact import Poly, QMatrix, binom, monomials, qmat_solve, rref
from .multiadditive import SymEquation, SymTerm, diagonalize, substitute_ones, symmetrize

Combo = dict[FnSymbol, Fraction]
Status = Literal["unique", "parametrized", "trivial-only"]

__all__ = [
    "BasisSymbol",
    "CanonicalEquation",
    "FunctionSolution",
    "ReductionError",
    "Reduction",
    "SingleReport",
    "SolutionStructure",
    "analyze_single",
    "canonicalize",
    "closed_form_basis",
    "find_counterexample",
    "power_solutions",
    "reduce_missing",
    "single_spec",
    "solve",
    "split_homogeneous",
    "verify_solution",
    "verify_structure",
]


class ReductionError(ValueError):
    """Substituting ones used up the whole degree of a block."""


# -- homogeneous blocks and canonical form ---------------------------------


def split_homogeneous(spec: EquationSpec) -> list[EquationSpec]:
    """Partition by degree ``p + q``, in order of first appearance."""
    blocks: dict[int, list[EquationTerm]] = {}
    for t in spec.terms:
        blocks.setdefault(t.degree, []).append(t)
    return [EquationSpec(tuple(ts)) for ts in blocks.values()]


def _combo_add(acc: Combo, combo: Mapping[FnSymbol, Fraction], scale: Fraction = Fraction(1)) -> None:
    for fn, c in combo.items():
        acc[fn] = acc.get(fn, Fraction(0)) + c * scale
        if not acc[fn]:
            del acc[fn]


def _scale_slots(slots: Mapping[int, Combo]) -> dict[int, Combo]:
    factor = primitive_factor(c for combo in slots.values() for c in combo.values())
    return {q: {fn: c * factor for fn, c in combo.items()} for q, combo in sorted(slots.items(), reverse=True)}


@dataclass(frozen=True, eq=False)
class CanonicalEquation:
    """A homogeneous block rewritten over slot functions.

    ``slots[q]`` is the combination of unknowns standing in front of
    ``x^(l-q) F(x^q)``.  Only nonzero slots are stored, highest q first.
    ``constraint`` holds the coefficients of ``sum_k c_k f_k(1) = 0``.
    """

    degree: int
    slots: dict[int, Combo]
    constraint: Combo
    merges: tuple[tuple[int, tuple[FnSymbol, ...]], ...] = ()
    absorbed: tuple[tuple[FnSymbol, Fraction], ...] = ()
    shifted: tuple[FnSymbol, ...] = ()
    fns: tuple[FnSymbol, ...] = ()

    @property
    def degenerate(self) -> bool:
        return not self.slots

    @property
    def missing(self) -> tuple[int, ...]:
        return tuple(q for q in range(1, self.degree + 1) if q not in self.slots)

    @property
    def spec(self) -> EquationSpec:
        """The slot equation ``sum_q x^(l-q) F_q(x^q) = 0``."""
        return EquationSpec(tuple(EquationTerm(1, self.degree - q, q, f"F{q}") for q in self.slots))


def canonicalize(spec: EquationSpec) -> CanonicalEquation:
    """Fold coefficients into slots, merge equal powers, absorb ``f(1)`` terms.

    The result is scaled to coprime integer slot coefficients.
    """
    if not spec.is_homogeneous():
        raise ValueError("canonicalize needs a homogeneous equation")
    l = spec.degree if spec.terms else 0
    slots: dict[int, Combo] = {}
    members: dict[int, list[FnSymbol]] = {}
    constraint: Combo = {}
    absorbed = []
    for t in spec.terms:
        _combo_add(constraint, {t.fn: t.coeff})
        if t.q == 0:
            # f(1) is a constant; after the f(1)-shift it only feeds the constraint
            absorbed.append((t.fn, t.coeff))
            continue
        _combo_add(slots.setdefault(t.q, {}), {t.fn: t.coeff})
        members.setdefault(t.q, []).append(t.fn)
    merges = tuple((q, tuple(fns)) for q, fns in members.items() if len(fns) > 1)
    slots = {q: c for q, c in slots.items() if c}
    return CanonicalEquation(
        degree=l,
        slots=_scale_slots(slots),
        constraint=constraint,
        merges=merges,
        absorbed=tuple(absorbed),
        shifted=spec.fns,
        fns=spec.fns,
    )


# -- closed form -------------------------------------------------------------


def closed_form_basis(n: int) -> QMatrix:
    """Rows ``f_{n+1-i}`` (i = 0..n) over columns ``D_0..D_n``.

    ``f_{n+1-i} = (-1)^i sum_k C(n+1-i+k, k) D_{n-i+k}``.  ``n = 0`` gives the
    single relation ``f_1 = D_0``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    rows = []
    for i in range(n + 1):
        sign = -1 if i % 2 else 1
        rows.append([sign * binom(j + 1, j - n + i) if j >= n - i else 0 for j in range(n + 1)])
    return QMatrix(rows)


# -- missing powers ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Reduction:
    """Block after eliminating missing powers.

    ``slots[q]`` expresses the reduced slot function at inner power q as a
    combination of the original unknowns.
    """

    degree: int
    slots: dict[int, Combo]
    rounds: tuple[int, ...]
    source_degree: int

    @property
    def missing(self) -> tuple[int, ...]:
        return tuple(q for q in range(1, self.degree + 1) if q not in self.slots)

    @property
    def spec(self) -> EquationSpec:
        return EquationSpec(tuple(EquationTerm(1, self.degree - q, q, f"F{q}") for q in self.slots))

    def expanded_spec(self) -> EquationSpec:
        """The reduced equation written over the original unknowns."""
        terms = []
        for q, combo in self.slots.items():
            for fn, c in combo.items():
                terms.append(EquationTerm(c, self.degree - q, q, fn))
        return EquationSpec(tuple(terms))


def _substitute_slots(slots: Mapping[int, Combo], l: int, s: int) -> dict[int, Combo]:
    sym = SymEquation(l, tuple(SymTerm(Fraction(1), l - q, f"F{q}") for q in slots))
    reduced = diagonalize(substitute_ones(sym, s))
    out: dict[int, Combo] = {}
    for t in reduced.terms:
        _combo_add(out.setdefault(t.q, {}), slots[int(t.fn[1:])], t.coeff)
    return {q: c for q, c in out.items() if c}


def reduce_missing(ce: CanonicalEquation) -> Reduction:
    """Substitute ones as many times as there are missing powers.

    If powers are still missing afterwards, single substitutions follow until
    the slots are complete.
    """
    if ce.degenerate:
        raise ReductionError("no slots to reduce")
    slots = dict(ce.slots)
    l = ce.degree
    rounds: list[int] = []
    s = len(ce.missing)
    while s:
        if l - s < 1:
            raise ReductionError(f"substituting {s} ones exhausts degree {l}")
        slots = _substitute_slots(slots, l, s)
        l -= s
        rounds.append(s)
        if not slots:
            raise ReductionError("every slot vanished during substitution")
        s = 1 if any(q not in slots for q in range(1, l + 1)) else 0
    return Reduction(l, _scale_slots(slots), tuple(rounds), ce.degree)


# -- solution structures -------------------------------------------------------


@dataclass(frozen=True)
class BasisSymbol:
    """Free symbol in a solution.

    ``order`` is i for ``D_i`` (an arbitrary derivation of order i) and None for
    an arbitrary additive map vanishing at 1.
    """

    name: str
    order: int | None
    block: int | None = None


@dataclass(frozen=True)
class FunctionSolution:
    """``f = x_part * f(1) * x + sum coeff * symbol``."""

    name: FnSymbol
    x_part: Fraction
    terms: tuple[tuple[str, Fraction], ...]

    def coeff(self, symbol: str) -> Fraction:
        if symbol == "X":
            return self.x_part
        return dict(self.terms).get(symbol, Fraction(0))

    def d_part(self) -> dict[str, Fraction]:
        return dict(self.terms)


@dataclass(frozen=True)
class SolutionStructure:
    functions: tuple[FunctionSolution, ...]
    symbols: tuple[BasisSymbol, ...]
    constraints: tuple[tuple[tuple[FnSymbol, Fraction], ...], ...]
    status: Status
    x_kernel: tuple[tuple[Fraction, ...], ...] = ()
    method: str = field(default="reduction", compare=False)
    degenerate_blocks: tuple[int, ...] = field(default=())

    def function(self, name: FnSymbol) -> FunctionSolution:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def symbol(self, name: str) -> BasisSymbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(name)

    def coefficient_table(self) -> dict[FnSymbol, dict[str, Fraction]]:
        """``{fn: {"X": ..., "D1": ..., ...}}`` with zero entries omitted."""
        out = {}
        for f in self.functions:
            row = {"X": f.x_part} if f.x_part else {}
            row.update(f.terms)
            out[f.name] = row
        return out

    def instantiate(
        self,
        values: Mapping[str, AdditiveMap],
        x_values: Mapping[FnSymbol, Fraction] | None = None,
        arity: int = 1,
    ) -> dict[FnSymbol, AdditiveMap]:
        """Concrete maps for each unknown; unassigned symbols are zero."""
        x_values = x_values or {}
        ident = DiffOperator.identity(arity)
        out: dict[FnSymbol, AdditiveMap] = {}
        for f in self.functions:
            parts = [(Fraction(x_values.get(f.name, 0)), ident)]
            parts += [(c, values[s]) for s, c in f.terms if s in values]
            out[f.name] = MapSum(parts)
        return out


def _order_key(order: int | None) -> int:
    return math.inf if order is None else order


BasisFn = Callable[[int], QMatrix]


@dataclass
class _System:
    block: int          # degree of the source block
    degree: int         # degree of the slot equation actually solved
    slots: dict[int, Combo]
    basis: BasisFn


def _assemble(
    fns: Sequence[FnSymbol],
    systems: Sequence[_System],
    constraint_rows: Sequence[Combo],
    normalized: bool,
    method: str,
    degenerate: Sequence[int] = (),
) -> SolutionStructure:
    k = len(fns)
    col_of = {fn: i for i, fn in enumerate(fns)}
    # D columns, highest order first so that pivots are expressed through lower orders
    d_cols = [(b, i) for b, sys_ in enumerate(systems) for i in range(1, sys_.degree)]
    d_cols.sort(key=lambda bi: (-bi[1], bi[0]))
    d_index = {bi: k + j for j, bi in enumerate(d_cols)}
    ncols = k + len(d_cols)
    rows = []
    for b, sys_ in enumerate(systems):
        n = sys_.degree - 1
        basis = sys_.basis(n)
        for q in range(1, sys_.degree + 1):
            row = [Fraction(0)] * ncols
            for fn, c in sys_.slots.get(q, {}).items():
                row[col_of[fn]] += c
            brow = basis.row(n + 1 - q)
            for i in range(1, n + 1):
                row[d_index[(b, i)]] -= brow[i]
            # D_0 column is dropped: the order-zero derivation is identically zero
            rows.append(row)
    reduced, pivots = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]

    d_blocks = {systems[d_cols[c - k][0]].block for c in free if c >= k}
    symbols: dict[int, BasisSymbol] = {}
    a_count = 0
    for c in free:
        if c < k:
            a_count += 1
            symbols[c] = BasisSymbol(f"A{a_count}", None)
        else:
            b, i = d_cols[c - k]
            blk = systems[b].block
            name = f"D{i}" if len(d_blocks) <= 1 else f"D{i}_{blk}"
            symbols[c] = BasisSymbol(name, i, blk)

    ordered_syms = sorted(symbols.items(), key=lambda kv: (_order_key(kv[1].order), kv[1].block or 0, kv[1].name))
    sym_rank = {c: r for r, (c, _) in enumerate(ordered_syms)}

    pivot_row = {pc: row for row, pc in zip(reduced, pivots)}
    functions = []
    x_kernel: tuple[tuple[Fraction, ...], ...] = ()
    x_free = [False] * k
    if not normalized:
        x_kernel = _x_kernel(fns, constraint_rows)
        for vec in x_kernel:
            for i, v in enumerate(vec):
                if v:
                    x_free[i] = True
    for i, fn in enumerate(fns):
        if i in pivot_row:
            expr = {c: -pivot_row[i][c] for c in free if pivot_row[i][c]}
        else:
            expr = {i: Fraction(1)}
        terms = tuple((symbols[c].name, v) for c, v in sorted(expr.items(), key=lambda kv: sym_rank[kv[0]]))
        functions.append(FunctionSolution(fn, Fraction(1 if x_free[i] else 0), terms))

    constraints = () if normalized else _x_constraints(fns, constraint_rows)
    if a_count:
        status: Status = "parametrized"
    elif any(f.terms for f in functions):
        status = "unique"
    else:
        status = "trivial-only"
    return SolutionStructure(
        functions=tuple(functions),
        symbols=tuple(s for _, s in ordered_syms),
        constraints=constraints,
        status=status,
        x_kernel=x_kernel,
        method=method,
        degenerate_blocks=tuple(degenerate),
    )


def _x_kernel(fns: Sequence[FnSymbol], rows: Sequence[Combo]) -> tuple[tuple[Fraction, ...], ...]:
    k = len(fns)
    if not k:
        return ()
    mat = [[r.get(fn, Fraction(0)) for fn in fns] for r in rows if r]
    if not mat:
        return tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))
    res = qmat_solve(QMatrix(mat), [0] * len(mat))
    return res.kernel


def _x_constraints(fns: Sequence[FnSymbol], rows: Sequence[Combo]) -> tuple[tuple[tuple[FnSymbol, Fraction], ...], ...]:
    mat = [[r.get(fn, Fraction(0)) for fn in fns] for r in rows if r]
    if not mat:
        return ()
    reduced, _ = rref(mat, len(fns))
    out = []
    for row in reduced:
        entries = tuple((fn, c) for fn, c in zip(fns, row) if c)
        # a single entry only says f(1) = 0, which the X coefficient already shows
        if len(entries) > 1:
            out.append(entries)
    return tuple(out)


def _systems_for(spec: EquationSpec, method: str, basis: BasisFn = closed_form_basis):
    systems = []
    constraints = []
    degenerate = []
    for block in split_homogeneous(spec):
        ce = canonicalize(block)
        constraints.append(ce.constraint)
        if ce.degenerate:
            degenerate.append(ce.degree)
            continue
        if method == "reduction":
            red = reduce_missing(ce)
            systems.append(_System(ce.degree, red.degree, red.slots, basis))
        elif method == "direct":
            systems.append(_System(ce.degree, ce.degree, ce.slots, basis))
        else:
            raise ValueError(f"unknown method {method!r}")
    return systems, constraints, degenerate


def solve(
    spec: EquationSpec,
    *,
    normalized: bool = False,
    degree_bound: int = 4,
    arity: int = 1,
    method: str = "reduction",
) -> SolutionStructure:
    """Solve and verify.

    ``normalized=True`` adds the hypothesis ``f(1) = 0`` for every unknown.
    ``method`` is ``"reduction"`` (substitute ones for missing powers, then the
    closed form) or ``"direct"`` (closed form at full degree, missing slots set
    to zero).  A reduction that fails verification falls back to ``"direct"``.
    """
    try:
        systems, constraints, degenerate = _systems_for(spec, method)
    except ReductionError:
        return solve(spec, normalized=normalized, degree_bound=degree_bound, arity=arity, method="direct")
    structure = _assemble(spec.fns, systems, constraints, normalized, method, degenerate)
    if verify_structure(spec, structure, degree_bound=degree_bound, arity=arity):
        return structure
    if method == "reduction":
        return solve(spec, normalized=normalized, degree_bound=degree_bound, arity=arity, method="direct")
    raise RuntimeError(f"{method} solution failed verification")


# -- verification ----------------------------------------------------------------


def _as_map(value, arity: int) -> AdditiveMap:
    if isinstance(value, tuple):
        x_part, op = value
        return MapSum([(Fraction(x_part), DiffOperator.identity(arity)), (Fraction(1), op)])
    return value


def find_counterexample(
    spec: EquationSpec,
    assignment: Mapping[FnSymbol, object],
    degree_bound: int = 4,
    arity: int = 1,
) -> tuple[int, tuple[Poly, ...]] | None:
    """First ``(block degree, monomial tuple)`` where the symmetric form is nonzero.

    Assignment values are additive maps or ``(x_part, DiffOperator)`` pairs
    meaning ``x -> x_part * x + op(x)``.
    """
    maps = {fn: _as_map(v, arity) for fn, v in assignment.items()}
    missing = set(spec.fns) - set(maps)
    if missing:
        raise KeyError(f"no assignment for {sorted(missing)}")
    monos = monomials(arity, degree_bound)
    for block in split_homogeneous(spec):
        sym = symmetrize(block)
        for xs in itertools.combinations_with_replacement(monos, sym.arity):
            if sym.evaluate(maps, xs, ring_arity=arity):
                return block.degree, xs
    return None


def verify_solution(
    spec: EquationSpec,
    assignment: Mapping[FnSymbol, object],
    degree_bound: int = 4,
    arity: int = 1,
) -> bool:
    return find_counterexample(spec, assignment, degree_bound, arity) is None


def _nonpolynomial_part(p: Poly) -> Poly:
    # additive, kills 1, and is not a differential operator
    return p - p.constant_term()


def standard_values(structure: SolutionStructure, arity: int = 1) -> dict[str, AdditiveMap]:
    """``D_i -> d^i`` with ``d = d/dt1``; ``A_r -> p - p(0)``."""
    d = BasicDerivation.partial(1, arity)
    out: dict[str, AdditiveMap] = {}
    for s in structure.symbols:
        out[s.name] = _nonpolynomial_part if s.order is None else DiffOperator.power(d, s.order)
    return out


def verify_structure(
    spec: EquationSpec,
    structure: SolutionStructure,
    values: Mapping[str, AdditiveMap] | None = None,
    degree_bound: int = 4,
    arity: int = 1,
) -> bool:
    """Check a structure against the equation.

    With explicit ``values`` this checks that one instantiation (every
    ``D_i`` operator must pass its order certificate).  Without, every symbol
    is instantiated alone with its standard map, each admissible ``f(1)``
    direction is checked alone, and finally everything together and nothing
    at all (with the f(1) directions summed).
    """
    fns = [f.name for f in structure.functions]
    if values is not None:
        for s in structure.symbols:
            op = values.get(s.name)
            if op is not None and s.order is not None and not order_check(op, s.order, degree_bound, arity):
                raise ValueError(f"{s.name} := {op} is not a derivation of order {s.order}")
        return verify_solution(spec, structure.instantiate(values, arity=arity), degree_bound, arity)

    std = standard_values(structure, arity)
    checks: list[tuple[dict, dict]] = []
    for s in structure.symbols:
        checks.append(({s.name: std[s.name]}, {}))
    for vec in structure.x_kernel:
        checks.append(({}, dict(zip(fns, vec))))
    summed = {fn: sum((v[i] for v in structure.x_kernel), Fraction(0)) for i, fn in enumerate(fns)}
    checks.append((std, summed))
    checks.append(({}, summed))
    for vals, xs in checks:
        if not verify_solution(spec, structure.instantiate(vals, xs, arity), degree_bound, arity):
            return False
    return True


# -- single unknown ------------------------------------------------------------


def single_spec(coeffs: Sequence[Fraction | int], fn: FnSymbol = "f") -> EquationSpec:
    """``sum_j a_j x^(n+1-j) f(x^j)`` for ``coeffs = (a_1, ..., a_{n+1})``."""
    n1 = len(coeffs)
    return EquationSpec(tuple(EquationTerm(a, n1 - j, j, fn) for j, a in enumerate(coeffs, 1) if a))


@dataclass(frozen=True)
class SingleReport:
    sum_weighted: Fraction
    max_order: int
    binomial_proportional: bool
    levels: tuple[tuple[Fraction, ...], ...]
    powers_solving: tuple[int, ...] | None = None


def _lower_level(a: Sequence[Fraction]) -> list[Fraction]:
    # a[j-1] = a_j; returns the coefficients one degree lower after x_{n+1} = 1
    n = len(a) - 1
    low = [Fraction(0)] * n
    for i in range(n):
        a_hi = a[n - i]          # a_{n+1-i}
        a_lo = a[n - i - 1]      # a_{n-i}
        low[n - i - 1] = binom(n, i) * (a_lo / binom(n + 1, i + 1) + a_hi / binom(n + 1, i))
    return low


def power_solutions(coeffs: Sequence[Fraction | int], max_power: int, degree_bound: int = 3, arity: int = 1) -> tuple[int, ...]:
    """Exponents j in 1..max_power for which ``d^j`` solves the single equation."""
    spec = single_spec(coeffs)
    d = BasicDerivation.partial(1, arity)
    return tuple(
        j for j in range(1, max_power + 1)
        if verify_solution(spec, {"f": DiffOperator.power(d, j)}, degree_bound, arity)
    )


def analyze_single(coeffs: Sequence[Fraction | int], degree_bound: int | None = None) -> SingleReport:
    """Maximal derivation order admitted by ``sum_j a_j x^(n+1-j) A(x^j) = 0``, A(1) = 0.

    A nonzero weighted sum ``sum j a_j`` forces A = 0.  Otherwise one argument
    is set to 1, giving coefficients of one degree less; if those vanish the
    current vector is proportional to the alternating binomial row and A is a
    free derivation of the current order.  With ``degree_bound`` the result is
    cross-checked against ``d^j`` on monomial tuples.
    """
    a = [Fraction(c) for c in coeffs]
    if not any(a):
        raise ValueError("all coefficients are zero")
    levels = [tuple(a)]
    first_sum = sum((j * c for j, c in enumerate(a, 1)), Fraction(0))
    while True:
        sw = sum((j * c for j, c in enumerate(a, 1)), Fraction(0))
        if sw:
            max_order, proportional = 0, False
            break
        low = _lower_level(a)
        if not any(low):
            max_order, proportional = len(a) - 1, True
            break
        a = low
        levels.append(tuple(a))
    powers = None
    if degree_bound is not None:
        powers = power_solutions(coeffs, len(coeffs), degree_bound)
        if powers != tuple(range(1, max_order + 1)):
            raise RuntimeError(f"brute force disagrees: d^j solves for j in {powers}, max order {max_order}")
    return SingleReport(first_sum, max_order, proportional, tuple(levels), powers)
