from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hoderiv.exact import Poly, QMatrix, binom, fmt_q, monomials, poly_arith, qmat_solve, rref

from strategies import rationals


@st.composite
def polys(draw, arity=2, max_deg=3, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = tuple(draw(st.integers(0, max_deg)) for _ in range(arity))
        terms[exps] = draw(rationals(9, 5))
    return Poly(terms, arity)


@st.composite
def matrices(draw, rows=None, cols=None):
    r = rows or draw(st.integers(1, 4))
    c = cols or draw(st.integers(1, 4))
    return QMatrix([[draw(rationals(5, 3, nonzero=False)) for _ in range(c)] for _ in range(r)])


class TestPolyRing:
    @given(polys(), polys(), polys())
    def test_addition_associative_commutative(self, a, b, c):
        assert (a + b) + c == a + (b + c)
        assert a + b == b + a

    @given(polys(), polys(), polys())
    def test_multiplication_laws(self, a, b, c):
        assert (a * b) * c == a * (b * c)
        assert a * b == b * a
        assert a * (b + c) == a * b + a * c

    @given(polys())
    def test_identities_and_inverse(self, a):
        assert a + Poly.zero(2) == a
        assert a * Poly.one(2) == a
        assert (a - a).is_zero()
        assert a + (-a) == 0

    @given(polys(), polys())
    def test_derivative_is_a_derivation(self, a, b):
        for i in (1, 2):
            assert (a * b).diff(i) == a.diff(i) * b + a * b.diff(i)
            assert (a + b).diff(i) == a.diff(i) + b.diff(i)

    @given(polys(), polys())
    def test_poly_arith_matches_operators(self, a, b):
        assert poly_arith("add", a, b) == a + b
        assert poly_arith("sub", a, b) == a - b
        assert poly_arith("mul", a, b) == a * b

    @given(polys(max_deg=2, max_terms=3), st.integers(0, 3))
    def test_power_is_repeated_product(self, a, k):
        expected = Poly.one(2)
        for _ in range(k):
            expected = expected * a
        assert a ** k == expected

    def test_zero_coefficients_dropped(self):
        p = Poly({(1,): Fraction(0), (2,): 3}, 1)
        assert p.terms == {(2,): Fraction(3)}
        assert p.degree() == 2

    def test_rendering(self):
        t1, t2 = Poly.var(1, 2), Poly.var(2, 2)
        assert str(t1 * t1 * t2 * 2 - Fraction(1, 3)) == "2*t1^2*t2 - 1/3"
        assert str(Poly.var(1) ** 3 - Poly.var(1)) == "t^3 - t"
        assert str(Poly.zero()) == "0"

    def test_scalar_equality_and_hash(self):
        assert Poly.constant(5) == 5
        assert hash(Poly({(1,): 2})) == hash(Poly({(1,): Fraction(2)}))

    def test_arity_mismatch_rejected(self):
        with pytest.raises(ValueError):
            Poly.var(1, 1) + Poly.var(1, 2)

    def test_monomials_enumeration(self):
        assert [str(m) for m in monomials(1, 3)] == ["1", "t", "t^2", "t^3"]
        assert len(monomials(2, 2)) == 6


def test_binom_and_format():
    assert binom(5, 2) == 10
    assert binom(3, 5) == 0
    with pytest.raises(ValueError):
        binom(-1, 0)
    assert fmt_q(Fraction(-1, 3)) == "-1/3"
    assert fmt_q(4) == "4"


class TestQMatrix:
    @given(matrices(3, 3), matrices(3, 3), matrices(3, 3))
    def test_matmul_associative(self, a, b, c):
        assert (a @ b) @ c == a @ (b @ c)

    @given(matrices(3, 3), st.integers(0, 7))
    @settings(max_examples=40)
    def test_power_matches_repeated_multiplication(self, m, k):
        expected = QMatrix.identity(3)
        for _ in range(k):
            expected = expected @ m
        assert m.power(k) == expected

    def test_power_zero_is_identity(self):
        m = QMatrix([[1, 2], [3, 4]])
        assert m.power(0) == QMatrix.identity(2)

    def test_non_square_power_rejected(self):
        with pytest.raises(ValueError):
            QMatrix([[1, 2]]).power(2)

    def test_transpose_and_apply(self):
        m = QMatrix([[1, 2, 3], [4, 5, 6]])
        assert m.transpose().shape == (3, 2)
        assert m.apply([1, 0, -1]) == (Fraction(-2), Fraction(-2))


class TestElimination:
    def test_rref_known(self):
        reduced, pivots = rref([[2, 4, 2], [1, 2, 3]])
        assert pivots == [0, 2]
        assert reduced == [[1, 2, 0], [0, 0, 1]]

    def test_unique_solution(self):
        res = qmat_solve(QMatrix([[2, 1], [1, 3]]), [3, 5])
        assert res.kind == "unique"
        assert res.particular == (Fraction(4, 5), Fraction(7, 5))

    def test_inconsistent(self):
        assert qmat_solve(QMatrix([[1, 1], [1, 1]]), [1, 2]).kind == "inconsistent"

    @given(matrices(), st.data())
    @settings(max_examples=60)
    def test_solution_and_kernel_are_exact(self, a, data):
        b = [data.draw(rationals(5, 3, nonzero=False)) for _ in range(a.rows)]
        res = qmat_solve(a, b)
        if res.kind == "inconsistent":
            # then no combination of columns reaches b: b is outside the column space
            reduced, pivots = rref([list(a.row(i)) + [b[i]] for i in range(a.rows)], a.cols + 1)
            assert a.cols in pivots
            return
        assert a.apply(res.particular) == tuple(Fraction(x) for x in b)
        for v in res.kernel:
            assert not any(a.apply(v))
        rank = len(rref([list(a.row(i)) for i in range(a.rows)], a.cols)[1])
        assert len(res.kernel) == a.cols - rank
