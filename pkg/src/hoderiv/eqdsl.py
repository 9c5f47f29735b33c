"""Text syntax for equations and solution displays.

Grammar (whitespace between tokens is ignored)::

    equation := sum "=" "0" | "0" "=" "0"
    sum      := ["+" | "-"] term (("+" | "-") term)*
    term     := [rational "*"] ["x" ["^" uint] "*"] ident "(" arg ")"
    arg      := "x" ["^" uint] | "1"
    rational := uint ["/" uint]

``x`` is reserved for the variable.  Offsets in errors are byte offsets into
the UTF-8 encoded input.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .equation import EquationSpec, EquationTerm
from .exact import fmt_q
from .solver import SolutionStructure

__all__ = [
    "ParseError",
    "SourceSpan",
    "parse",
    "render_solution",
    "render_spec",
    "render_term",
    "solution_json",
    "solution_lines",
    "solution_object",
]


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start <= self.end:
            raise ValueError("bad span")


class ParseError(ValueError):
    def __init__(self, span: SourceSpan, message: str, expected: frozenset[str] = frozenset()):
        super().__init__(f"{message} at offset {span.start}")
        self.span = span
        self.message = message
        self.expected = expected


_TOKENS = re.compile(r"(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[-+*/^()=])")


@dataclass(frozen=True)
class _Tok:
    kind: str   # int | ident | punct | end
    text: str
    span: SourceSpan


def _tokenize(text: str) -> list[_Tok]:
    # byte offset of every character position
    offsets = [0]
    for ch in text:
        offsets.append(offsets[-1] + len(ch.encode("utf-8")))
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKENS.match(text, pos)
        if not m:
            span = SourceSpan(offsets[pos], offsets[pos + 1])
            raise ParseError(span, f"unexpected character {text[pos]!r}")
        toks.append(_Tok(m.lastgroup, m.group(), SourceSpan(offsets[pos], offsets[m.end()])))
        pos = m.end()
    toks.append(_Tok("end", "", SourceSpan(offsets[-1], offsets[-1])))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, expected: set[str]) -> ParseError:
        t = self.tok
        found = "end of input" if t.kind == "end" else repr(t.text)
        want = ", ".join(sorted(expected))
        return ParseError(t.span, f"unexpected {found}, expected {want}", frozenset(expected))

    def accept(self, text: str) -> bool:
        if self.tok.kind == "punct" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise self.fail({repr(text)})

    def uint(self) -> int:
        if self.tok.kind != "int":
            raise self.fail({"integer"})
        value = int(self.tok.text)
        self.i += 1
        return value

    def equation(self) -> EquationSpec:
        if self.tok.kind == "int" and self.tok.text == "0" and self.peek().text == "=":
            self.i += 1
            terms: list[EquationTerm] = []
        else:
            terms = self.sum()
        self.expect("=")
        if self.tok.kind != "int" or int(self.tok.text) != 0:
            raise self.fail({"'0'"})
        self.i += 1
        if self.tok.kind != "end":
            raise self.fail({"end of input"})
        return EquationSpec(tuple(terms))

    def sum(self) -> list[EquationTerm]:
        sign = 1
        if self.accept("-"):
            sign = -1
        else:
            self.accept("+")
        terms = [self.term(sign)]
        while self.tok.kind == "punct" and self.tok.text in "+-":
            sign = -1 if self.tok.text == "-" else 1
            self.i += 1
            terms.append(self.term(sign))
        return terms

    def term(self, sign: int) -> EquationTerm:
        start = self.tok.span
        coeff = Fraction(sign)
        if self.tok.kind == "int":
            num = self.uint()
            den = 1
            if self.accept("/"):
                den_tok = self.tok
                den = self.uint()
                if den == 0:
                    raise ParseError(den_tok.span, "zero denominator", frozenset({"positive integer"}))
            coeff *= Fraction(num, den)
            self.expect("*")
        p = 0
        if self.tok.kind == "ident" and self.tok.text == "x":
            self.i += 1
            p = 1
            if self.accept("^"):
                p = self.uint()
            self.expect("*")
        if self.tok.kind != "ident" or self.tok.text == "x":
            raise self.fail({"function name"})
        fn = self.tok.text
        self.i += 1
        self.expect("(")
        if self.tok.kind == "ident" and self.tok.text == "x":
            self.i += 1
            q = 1
            if self.accept("^"):
                q = self.uint()
        elif self.tok.kind == "int" and self.tok.text == "1":
            self.i += 1
            q = 0
        else:
            raise self.fail({"'x'", "'1'"})
        self.expect(")")
        if not coeff:
            raise ParseError(SourceSpan(start.start, self.toks[self.i - 1].span.end), "zero coefficient")
        return EquationTerm(coeff, p, q, fn)


def parse(text: str) -> EquationSpec:
    return _Parser(text).equation()


def render_term(t: EquationTerm) -> str:
    """Unsigned text of a term, e.g. ``2*x^2*f(x)``."""
    parts = []
    mag = abs(t.coeff)
    if mag != 1:
        parts.append(fmt_q(mag))
    if t.p:
        parts.append("x" if t.p == 1 else f"x^{t.p}")
    arg = "1" if t.q == 0 else "x" if t.q == 1 else f"x^{t.q}"
    parts.append(f"{t.fn}({arg})")
    return "*".join(parts)


def render_spec(spec: EquationSpec) -> str:
    if not spec.terms:
        return "0 = 0"
    first, *rest = spec.terms
    out = ("-" if first.coeff < 0 else "") + render_term(first)
    for t in rest:
        out += f" {'-' if t.coeff < 0 else '+'} {render_term(t)}"
    return out + " = 0"


def _linear(pairs: list[tuple[str, Fraction]]) -> str:
    if not pairs:
        return "0"
    pieces = []
    for name, c in pairs:
        mag = abs(c)
        body = name if mag == 1 else f"{fmt_q(mag)}*{name}"
        pieces.append(("-" if c < 0 else "+", body))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, body in pieces[1:]:
        out += f" {sign} {body}"
    return out


def _function_line(name: str, pairs: list[tuple[str, Fraction]]) -> str:
    lcm = 1
    for _, c in pairs:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    lhs = name if lcm == 1 else f"{lcm}*{name}"
    return f"{lhs} = {_linear([(s, c * lcm) for s, c in pairs])}"


def _pairs(f) -> list[tuple[str, Fraction]]:
    pairs = [(f"{f.name}(1)*x", f.x_part)] if f.x_part else []
    return pairs + list(f.terms)


def _constraint_text(entries) -> str:
    return _linear([(f"{fn}(1)", c) for fn, c in entries]) + " = 0"


def solution_lines(s: SolutionStructure) -> list[str]:
    lines = [_function_line(f.name, _pairs(f)) for f in s.functions]
    lines += [_constraint_text(c) for c in s.constraints]
    return lines


def render_solution(s: SolutionStructure) -> str:
    """One line per function with denominators cleared, then any f(1) relations."""
    return "\n".join(solution_lines(s))


def solution_object(s: SolutionStructure) -> dict:
    functions = []
    for f in s.functions:
        terms = [{"basis": "X", "coeff": fmt_q(f.x_part)}] if f.x_part else []
        terms += [{"basis": name, "coeff": fmt_q(c)} for name, c in f.terms]
        functions.append({
            "name": f.name,
            "denominatorCleared": _function_line(f.name, _pairs(f)),
            "terms": terms,
        })
    return {
        "functions": functions,
        "status": s.status,
        "constraints": [_constraint_text(c) for c in s.constraints],
    }


def solution_json(s: SolutionStructure) -> str:
    return json.dumps(solution_object(s), indent=2, ensure_ascii=False)
