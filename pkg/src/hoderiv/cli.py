"""Command line entry point: ``hoderiv <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 parse or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from fractions import Fraction
from typing import Sequence

from .derivations import BasicDerivation, DiffOperator, order_counterexample, parse_operator
from .eqdsl import ParseError, parse, render_solution, solution_object
from .exact import QMatrix, fmt_q
from .multiadditive import polarization_report
from .solver import (
    analyze_single,
    closed_form_basis,
    find_counterexample,
    solve,
)
from . import spectral

BOUND_ENV = "HODERIV_BOUND"


class UsageError(Exception):
    pass


def _default_bound() -> int:
    raw = os.environ.get(BOUND_ENV)
    if raw is None:
        return 4
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{BOUND_ENV} must be an integer, got {raw!r}")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--arity", type=_positive, default=1, help="number of ring variables t1..tm")
    common.add_argument("--bound", type=_positive, default=None, help=f"verification degree bound (default 4, or ${BOUND_ENV})")
    common.add_argument("--format", choices=("text", "json"), default="text")

    eq_input = argparse.ArgumentParser(add_help=False)
    eq_input.add_argument("equation", nargs="?", help="equation text, e.g. 'f(x^3) + x^2*g(x) = 0'")
    eq_input.add_argument("--file", help="read the equation from a file")
    eq_input.add_argument("--normalized", action="store_true", help="assume f(1) = 0 for every unknown")

    parser = argparse.ArgumentParser(prog="hoderiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common, eq_input], help="solve an equation")
    p.add_argument("--method", choices=("reduction", "direct", "descending"), default="reduction")

    p = sub.add_parser("verify", parents=[common, eq_input], help="check an instantiated solution")
    p.add_argument(
        "--assign", nargs="+", default=[], metavar="KEY=VALUE",
        help="D1=d1, D2=d1.d1, f=d1, f(1)=2; unassigned symbols are zero",
    )

    p = sub.add_parser("basis", parents=[common], help="closed-form solution table")
    p.add_argument("n", type=_nonneg)

    p = sub.add_parser("spectral", parents=[common], help="transfer matrix displays")
    p.add_argument("n", type=_positive)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--power", type=_nonneg, metavar="K")
    mode.add_argument("--limit", action="store_true")
    mode.add_argument("--descend", metavar="EQUATION")

    p = sub.add_parser("polarize", parents=[common], help="polarization identities for products of d/dt1")
    p.add_argument("--n", type=_positive, required=True)

    p = sub.add_parser("analyze", parents=[common], help="single-unknown coefficient analysis")
    p.add_argument("coeffs", help="a_1..a_{n+1}, comma or space separated")
    return parser


def _read_equation(args) -> str:
    if args.file:
        if args.equation:
            raise UsageError("give the equation either inline or with --file, not both")
        with open(args.file, encoding="utf-8") as fh:
            return fh.read()
    if not args.equation:
        raise UsageError("missing equation")
    return args.equation


def _parse_error_text(text: str, err: ParseError) -> str:
    raw = text.encode("utf-8")
    prefix = raw[: err.span.start].decode("utf-8", errors="replace")
    width = max(1, len(raw[err.span.start: err.span.end].decode("utf-8", errors="replace")))
    line = text.replace("\n", " ")
    return f"error: {err}\n  {line}\n  {' ' * len(prefix)}{'^' * width}"


def _emit(out, args, text_lines: Sequence[str], obj) -> None:
    if args.format == "json":
        out.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")
    else:
        for line in text_lines:
            out.write(line + "\n")


def _matrix_obj(m: QMatrix) -> list[list[str]]:
    return [[fmt_q(c) for c in row] for row in m.tolist()]


def _basis_lines(n: int) -> list[str]:
    m = closed_form_basis(n)
    lines = []
    for i in range(n + 1):
        pairs = [(f"D{j}", m[i, j]) for j in range(n, -1, -1) if m[i, j]]
        rhs = " ".join(
            (("-" if c < 0 else "") if k == 0 else ("- " if c < 0 else "+ "))
            + (name if abs(c) == 1 else f"{fmt_q(abs(c))}*{name}")
            for k, (name, c) in enumerate(pairs)
        )
        lines.append(f"f{n + 1 - i} = {rhs}")
    return lines


def _cmd_solve(args, out) -> int:
    spec = parse(_read_equation(args))
    kwargs = dict(normalized=args.normalized, degree_bound=args.bound, arity=args.arity)
    if args.method == "descending":
        s = spectral.descending_solve(spec, **kwargs)
    else:
        s = solve(spec, method=args.method, **kwargs)
    _emit(out, args, render_solution(s).splitlines(), solution_object(s))
    return 0


def _parse_assignments(items: Sequence[str], arity: int):
    ops: dict[str, DiffOperator] = {}
    xs: dict[str, Fraction] = {}
    for item in items:
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise UsageError(f"assignment {item!r} is not KEY=VALUE")
        if key.endswith("(1)"):
            try:
                xs[key[:-3]] = Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise UsageError(f"bad rational in {item!r}")
            continue
        try:
            ops[key] = parse_operator(value, arity)
        except ValueError as exc:
            raise UsageError(str(exc))
    return ops, xs


def _cmd_verify(args, out) -> int:
    spec = parse(_read_equation(args))
    ops, xs = _parse_assignments(args.assign, args.arity)
    fn_names = set(spec.fns)
    unknown = set(ops) | set(xs)
    structure = solve(spec, normalized=args.normalized, degree_bound=args.bound, arity=args.arity)
    symbols = {s.name: s for s in structure.symbols}
    stray = unknown - fn_names - set(symbols)
    if stray:
        raise UsageError(f"unknown assignment keys: {', '.join(sorted(stray))}")
    for name, op in ops.items():
        sym = symbols.get(name)
        if sym is not None and sym.order is not None:
            bad = order_counterexample(op, sym.order, args.bound, args.arity)
            if bad is not None:
                raise UsageError(f"{name} := {op} is not a derivation of order {sym.order}")
    maps = structure.instantiate({k: v for k, v in ops.items() if k in symbols}, xs, args.arity)
    ident = DiffOperator.identity(args.arity)
    for fn in fn_names & set(ops):
        maps[fn] = (lambda op, c: (lambda p: op(p) + ident(p) * c))(ops[fn], xs.get(fn, Fraction(0)))
    hit = find_counterexample(spec, maps, args.bound, args.arity)
    if hit is None:
        _emit(out, args, [f"pass (bound {args.bound})"], {"result": "pass", "bound": args.bound})
        return 0
    degree, tup = hit
    shown = "(" + ", ".join(str(p) for p in tup) + ")"
    _emit(
        out, args,
        [f"fail: degree {degree} block does not vanish at {shown}"],
        {"result": "fail", "bound": args.bound, "block": degree, "counterexample": [str(p) for p in tup]},
    )
    return 1


def _cmd_basis(args, out) -> int:
    lines = _basis_lines(args.n)
    _emit(out, args, lines, {"n": args.n, "rows": lines, "matrix": _matrix_obj(closed_form_basis(args.n))})
    return 0


def _cmd_spectral(args, out) -> int:
    n = args.n
    if args.descend:
        spec = parse(args.descend)
        if spec.degrees() != (n + 1,):
            raise UsageError(f"--descend needs a homogeneous equation of degree {n + 1}")
        lines = []
        trace = spectral.descending_trace(n)
        for step in trace:
            top = step.level + 1
            sign = "" if step.sign > 0 else "-"
            lines.append(f"level {step.level}: F{top} = {sign}D{step.level}")
            for j, s in enumerate(step.shifts, 1):
                if s:
                    op = "+" if s > 0 else "-"
                    mag = "" if abs(s) == 1 else f"{fmt_q(abs(s))}*"
                    lines.append(f"  F~{j} = F{j} {op} {mag}F{top}")
        structure = spectral.descending_solve(spec, degree_bound=args.bound, arity=args.arity, normalized=True)
        lines += render_solution(structure).splitlines()
        obj = {
            "trace": [
                {"level": s.level, "sign": s.sign, "shifts": [fmt_q(c) for c in s.shifts]} for s in trace
            ],
            "solution": solution_object(structure),
        }
        _emit(out, args, lines, obj)
        return 0
    m = spectral.transfer_matrix(n).matrix
    if args.limit:
        shown, label = spectral.limit_matrix(n), "L"
    elif args.power is not None:
        shown, label = spectral.matrix_power(m, args.power), f"M^{args.power}"
    else:
        shown, label = m, "M"
    lines = [f"{label} =", *spectral.render_matrix(shown).splitlines()]
    _emit(out, args, lines, {"n": n, "label": label, "matrix": _matrix_obj(shown)})
    return 0


def _cmd_polarize(args, out) -> int:
    d = BasicDerivation.partial(1, args.arity)
    report = polarization_report(d, args.n, args.bound, args.arity)
    lines = [f"{k}: {'ok' if v else 'FAIL'}" for k, v in report.items()]
    _emit(out, args, lines, {"n": args.n, "bound": args.bound, **report})
    return 0 if all(report.values()) else 1


def _cmd_analyze(args, out) -> int:
    raw = args.coeffs.replace(",", " ").split()
    try:
        coeffs = [Fraction(c) for c in raw]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad coefficient list {args.coeffs!r}")
    if not coeffs or not any(coeffs):
        raise UsageError("coefficients must not all be zero")
    report = analyze_single(coeffs, degree_bound=args.bound)
    lines = [
        f"sum_weighted: {fmt_q(report.sum_weighted)}",
        f"max_order: {report.max_order}",
        f"binomial_proportional: {str(report.binomial_proportional).lower()}",
        f"powers_solving: {list(report.powers_solving)}",
        "status: " + ("trivial-only" if report.max_order == 0 else f"D{report.max_order} free"),
    ]
    obj = {
        "sumWeighted": fmt_q(report.sum_weighted),
        "maxOrder": report.max_order,
        "binomialProportional": report.binomial_proportional,
        "powersSolving": list(report.powers_solving),
        "levels": [[fmt_q(c) for c in lvl] for lvl in report.levels],
    }
    _emit(out, args, lines, obj)
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "basis": _cmd_basis,
    "spectral": _cmd_spectral,
    "polarize": _cmd_polarize,
    "analyze": _cmd_analyze,
}


def _protect_coefficients(argv: list[str]) -> list[str]:
    # argparse reads "analyze -2,1,1" as an unknown option; move the list behind "--"
    if "analyze" not in argv or "--" in argv:
        return argv
    at = argv.index("analyze")
    lists = [a for a in argv[at + 1:] if re.match(r"-\d", a)]
    if len(lists) != 1:
        return argv
    rest = [a for a in argv if a is not lists[0]]
    return rest + ["--", lists[0]]


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    argv = _protect_coefficients(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    text = None
    try:
        if args.bound is None:
            args.bound = _default_bound()
            if args.bound < 1:
                raise UsageError(f"{BOUND_ENV} must be at least 1")
        if args.command in ("solve", "verify"):
            text = _read_equation(args)
        return _COMMANDS[args.command](args, out)
    except ParseError as exc:
        source = text if text is not None else (getattr(args, "descend", None) or "")
        err.write(_parse_error_text(source, exc) + "\n")
        return 2
    except (UsageError, OSError) as exc:
        err.write(f"error: {exc}\n")
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
