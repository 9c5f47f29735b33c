from fractions import Fraction

from hypothesis import strategies as st

from hoderiv.equation import EquationSpec, EquationTerm

FN_NAMES = ("f", "g", "h", "u", "w2", "phi_1")


def rationals(max_num: int = 99, max_den: int = 99, nonzero: bool = True):
    num = st.integers(-max_num, max_num)
    if nonzero:
        num = num.filter(bool)
    return st.builds(Fraction, num, st.integers(1, max_den))


@st.composite
def specs(draw, max_terms: int = 6, max_exp: int = 9, fns=FN_NAMES):
    """Arbitrary (not necessarily homogeneous) equations."""
    n = draw(st.integers(0, max_terms))
    terms = [
        EquationTerm(draw(rationals()), draw(st.integers(0, max_exp)), draw(st.integers(0, max_exp)), draw(st.sampled_from(fns)))
        for _ in range(n)
    ]
    return EquationSpec(tuple(terms))


@st.composite
def homogeneous_specs(draw, max_degree: int = 6, max_terms: int = 5, fns=("f", "g", "h"), small: bool = False):
    l = draw(st.integers(1, max_degree))
    n = draw(st.integers(1, max_terms))
    coeff = st.integers(-4, 4).filter(bool).map(Fraction) if small else rationals(9, 9)
    terms = []
    for _ in range(n):
        p = draw(st.integers(0, l))
        terms.append(EquationTerm(draw(coeff), p, l - p, draw(st.sampled_from(fns))))
    return EquationSpec(tuple(terms))
