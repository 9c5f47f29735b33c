"""Exact solver for additive functional equations with derivation-type solutions."""

from .derivations import BasicDerivation, DiffOperator, order_check, parse_operator
from .equation import EquationSpec, EquationTerm
from .eqdsl import ParseError, parse, render_solution, render_spec
from .exact import Poly, QMatrix
from .solver import analyze_single, closed_form_basis, solve, verify_solution

__all__ = [
    "BasicDerivation",
    "DiffOperator",
    "EquationSpec",
    "EquationTerm",
    "ParseError",
    "Poly",
    "QMatrix",
    "analyze_single",
    "closed_form_basis",
    "order_check",
    "parse",
    "parse_operator",
    "render_solution",
    "render_spec",
    "solve",
    "verify_solution",
]
