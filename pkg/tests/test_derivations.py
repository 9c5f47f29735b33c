import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hoderiv.derivations import (
    BasicDerivation,
    DiffOperator,
    MapSum,
    apply_operator,
    defect,
    leibniz_expand,
    order_check,
    order_counterexample,
    order_identity,
    parse_operator,
)
from hoderiv.exact import Poly, monomials

d = BasicDerivation.partial(1)
t = Poly.var(1)


def random_poly(rng, arity=1, max_deg=4):
    terms = {}
    for _ in range(rng.randint(1, 4)):
        exps = tuple(rng.randint(0, max_deg) for _ in range(arity))
        terms[exps] = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
    return Poly(terms, arity)


class TestBasicDerivation:
    def test_partial_differentiates(self):
        assert d(t ** 3) == t * t * 3
        assert d(Poly.one()) == 0

    def test_general_coefficients(self):
        t1, t2 = Poly.var(1, 2), Poly.var(2, 2)
        euler = BasicDerivation((t1, t2))
        assert euler(t1 * t1 * t2) == t1 * t1 * t2 * 3
        assert euler.partial_index() is None
        assert BasicDerivation.partial(2, 2).partial_index() == 2

    def test_defect_vanishes_for_derivations(self):
        for x in monomials(1, 3):
            for y in monomials(1, 3):
                assert defect(d, x, y).is_zero()

    def test_defect_detects_second_order(self):
        dd = DiffOperator.power(d, 2)
        assert not defect(dd, t, t).is_zero()

    def test_bad_index(self):
        with pytest.raises(ValueError):
            BasicDerivation.partial(3, 2)


class TestDiffOperator:
    def test_composition_and_sum(self):
        op = DiffOperator.of(d) @ DiffOperator.of(d) + DiffOperator.identity() * 2
        assert op(t ** 3) == t * 6 + t ** 3 * 2
        assert op.order == 2 and op.includes_identity

    def test_zero_terms_vanish(self):
        op = DiffOperator.of(d) - DiffOperator.of(d)
        assert op.is_zero() and str(op) == "0"

    def test_normalized_sorts_commuting_partials(self):
        d1, d2 = BasicDerivation.partial(1, 2), BasicDerivation.partial(2, 2)
        a = DiffOperator(((1, (d2, d1)),), 2).normalized()
        b = DiffOperator(((1, (d1, d2)),), 2)
        assert a == b

    def test_apply_operator(self):
        assert apply_operator(DiffOperator.power(d, 2), t ** 2) == 2

    def test_map_sum(self):
        m = MapSum([(2, d), (-1, lambda p: p)])
        assert m(t ** 2) == t * 4 - t ** 2


class TestOrderCertificates:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_powers_have_exact_order(self, n):
        dn = DiffOperator.power(d, n)
        assert order_check(dn, n, 4)
        assert not order_check(dn, n - 1, 4)

    def test_identity_is_not_a_derivation(self):
        # the identity is a differential operator but no derivation of any order
        ident = DiffOperator.identity()
        assert order_counterexample(ident, 3, 3) is not None

    def test_mixed_operator_in_two_variables(self):
        d1, d2 = BasicDerivation.partial(1, 2), BasicDerivation.partial(2, 2)
        op = DiffOperator(((1, (d1, d2)), (3, (d1,))), 2)
        assert order_check(op, 2, 3, arity=2)
        assert not order_check(op, 1, 3, arity=2)

    def test_order_identity_single_variable_is_vanishing_at_one(self):
        # with one variable the identity reads A(x) - x A(1)
        assert order_identity(d, [t ** 2]) == t * 2

    def test_zero_map_has_every_order(self):
        assert order_check(DiffOperator.zero(), 0, 3)


class TestLeibniz:
    @pytest.mark.parametrize("k", range(5))
    def test_leibniz_matches_operator(self, k):
        rng = random.Random(k)
        dk = DiffOperator.power(d, k)
        for _ in range(20):
            x, y = random_poly(rng), random_poly(rng)
            assert leibniz_expand(d, k, x, y) == apply_operator(dk, x * y)

    @given(st.integers(0, 4), st.integers(0, 5), st.integers(0, 5))
    def test_leibniz_on_monomials_two_variables(self, k, a, b):
        d2 = BasicDerivation((Poly.var(2, 2), Poly.one(2)))
        x = Poly.monomial((a, b))
        y = Poly.monomial((b, a))
        op = DiffOperator.power(d2, k)
        assert leibniz_expand(d2, k, x, y) == op(x * y)


class TestParseOperator:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("d1", "d1"),
            ("d1.d1", "d1∘d1"),
            ("3/2*d1∘d1 + d1", "d1 + 3/2*d1∘d1"),
            ("-d1 + id", "id - d1"),
            ("0", "0"),
            ("2", "2*id"),
        ],
    )
    def test_round_trip_text(self, text, expected):
        assert str(parse_operator(text)) == expected

    def test_multivariate(self):
        op = parse_operator("d1.d2", 2)
        t1, t2 = Poly.var(1, 2), Poly.var(2, 2)
        assert op(t1 * t2) == 1

    @pytest.mark.parametrize("text", ["d", "d1..d1", "d1 +", "q1", "2*"])
    def test_rejects_garbage(self, text):
        with pytest.raises(ValueError):
            parse_operator(text)

    @given(st.lists(st.tuples(st.integers(-5, 5).filter(bool), st.integers(0, 3)), min_size=1, max_size=4))
    @settings(max_examples=50)
    def test_printed_form_parses_back(self, spec):
        op = DiffOperator.zero()
        for c, k in spec:
            op = op + DiffOperator.power(d, k) * c
        again = parse_operator(str(op).replace("∘", "."))
        for m in monomials(1, 5):
            assert again(m) == op(m)
