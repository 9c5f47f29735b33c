import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hoderiv.eqdsl import ParseError, parse, render_solution, render_spec, solution_json
from hoderiv.equation import EquationSpec, EquationTerm
from hoderiv.solver import solve

from oracles import binomial_spec
from strategies import specs

F = Fraction


class TestParse:
    def test_three_unknowns(self):
        spec = parse("f(x^5) + x*g(x^4) + x^4*h(x) = 0")
        assert spec == EquationSpec.of((1, 0, 5, "f"), (1, 1, 4, "g"), (1, 4, 1, "h"))

    def test_single_unknown_coefficients(self):
        spec = parse("f(x^3) + x*f(x^2) - 2*x^2*f(x) = 0")
        assert [t.coeff for t in spec.terms] == [1, 1, -2]

    def test_defaults_and_constants(self):
        spec = parse("-3/4*g(1) + x^2*f(x)=0")
        assert spec.terms == (EquationTerm(F(-3, 4), 0, 0, "g"), EquationTerm(F(1), 2, 1, "f"))

    def test_whitespace_and_newlines(self):
        assert parse(" f ( x ^ 2 )\n - 2 * x * f ( x ) = 0 ") == parse("f(x^2)-2*x*f(x)=0")

    def test_empty_equation(self):
        assert parse("0 = 0") == EquationSpec()

    def test_identifiers(self):
        spec = parse("phi_1(x^2) + x*w2(x) = 0")
        assert spec.fns == ("phi_1", "w2")

    @pytest.mark.parametrize(
        "text, offset",
        [
            ("f(x^", 4),
            ("f(x", 3),
            ("f(x^2) + ", 9),
            ("f(x^2)", 6),
            ("f(x^2) = 1", 9),
            ("x(x) = 0", 1),
            ("2f(x) = 0", 1),
            ("f(y) = 0", 2),
            ("f(x) = 0 junk", 9),
            ("f(x) $ = 0", 5),
            ("1/0*f(x) = 0", 2),
            ("0*f(x) = 0", 0),
        ],
    )
    def test_errors_carry_spans(self, text, offset):
        with pytest.raises(ParseError) as info:
            parse(text)
        err = info.value
        assert err.span.start == offset
        assert 0 <= err.span.start <= err.span.end <= len(text.encode())

    def test_error_names_token_and_expectations(self):
        with pytest.raises(ParseError) as info:
            parse("f(x) + = 0")
        assert "'='" in info.value.message
        assert "function name" in info.value.expected

    def test_byte_offsets_after_unicode(self):
        with pytest.raises(ParseError) as info:
            parse("f(x) ∘ g(x) = 0")
        assert info.value.span == type(info.value.span)(5, 8)

    @given(st.text(max_size=30))
    @settings(max_examples=200)
    def test_spans_stay_inside_input(self, text):
        try:
            parse(text)
        except ParseError as err:
            assert 0 <= err.span.start <= err.span.end <= len(text.encode())


class TestRenderSpec:
    def test_round_trip_is_byte_identical(self):
        text = "f(x^5) + x*g(x^4) + x^4*h(x) = 0"
        assert render_spec(parse(text)) == text

    def test_negative_term(self):
        spec = EquationSpec.of((1, 0, 3, "f"), (-2, 2, 1, "f"))
        assert render_spec(spec) == "f(x^3) - 2*x^2*f(x) = 0"
        assert render_spec(EquationSpec.of((-2, 2, 1, "f"))) == "-2*x^2*f(x) = 0"

    def test_empty(self):
        assert render_spec(EquationSpec()) == "0 = 0"

    @given(specs())
    @settings(max_examples=300)
    def test_parse_inverts_render(self, spec):
        assert parse(render_spec(spec)) == spec


class TestRenderSolution:
    def test_three_unknowns(self):
        s = solve(parse("f(x^5) + x*g(x^4) + x^4*h(x) = 0"), normalized=True)
        assert render_solution(s).splitlines() == ["15*f = 2*D1 + 9*D2", "3*g = -D1 - 3*D2", "3*h = 2*D1 + 3*D2"]

    def test_x_part(self):
        s = solve(parse("f(x^3) + x*f(x^2) - 2*x^2*f(x) = 0"))
        assert render_solution(s) == "f = f(1)*x"

    def test_zero(self):
        s = solve(parse("f(x^3) + x*f(x^2) - 2*x^2*f(x) = 0"), normalized=True)
        assert render_solution(s) == "f = 0"

    def test_binomial(self):
        assert render_solution(solve(binomial_spec(4), normalized=True)) == "f = D4"

    def test_constraints_listed(self):
        s = solve(parse("f(x^3) + x^2*g(x) = 0"))
        assert render_solution(s).splitlines()[-1] == "f(1) + g(1) = 0"

    def test_json_schema(self):
        s = solve(parse("f(x^3) + x^2*g(x) = 0"), normalized=True)
        obj = json.loads(solution_json(s))
        assert set(obj) == {"functions", "status", "constraints"}
        assert obj["functions"][0] == {
            "name": "f",
            "denominatorCleared": "3*f = D1",
            "terms": [{"basis": "D1", "coeff": "1/3"}],
        }
        assert obj["status"] == "unique"
        assert solution_json(s) == solution_json(solve(parse("f(x^3) + x^2*g(x) = 0"), normalized=True))
