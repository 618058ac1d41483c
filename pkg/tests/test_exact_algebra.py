from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from spinverify.exact_algebra import (
    ONE,
    W,
    X_A,
    X_B,
    X_C,
    X_D,
    ZERO,
    AlgebraError,
    LaurentPoly,
    TruncatedSeries,
    factor_monomial,
    laurent_mul,
    rat,
    rat_inv,
    rat_str,
    series_equal,
    series_from_poly,
    series_geo_inverse,
    series_mul,
    torus_monomial,
)

xa, xb, w, Q = sympy.symbols("xa xb w Q")


def to_sympy(poly: LaurentPoly):
    return sum(sympy.Rational(c.numerator, c.denominator) * xa**ea * xb**eb * w**ew
               for (ea, eb, ew), c in poly.items())


def series_to_sympy(s: TruncatedSeries):
    return sum(to_sympy(c) * Q**k for k, c in enumerate(s.coeffs))


small = st.integers(-3, 3)
rationals = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def laurent(draw):
    n = draw(st.integers(0, 4))
    return LaurentPoly({(draw(small), draw(small), draw(small)): draw(rationals) for _ in range(n)})


def test_rational_examples():
    assert rat(1, 2) + rat(1, 3) == Fraction(5, 6)
    assert rat_inv(Fraction(1, 5)) == 5
    assert (1 - Fraction(1, 5)) * Fraction(5, 4) == 1
    assert rat_str(Fraction(-3, 6)) == "-1/2"
    assert rat_str(Fraction(4)) == "4/1"
    with pytest.raises(AlgebraError):
        rat_inv(0)


def test_laurent_relations():
    assert X_A * X_D == W
    assert X_B * X_C == W
    assert laurent_mul(ZERO, X_A).is_zero()
    assert (X_A * X_A**-1) == ONE
    assert X_A**0 == ONE


def test_laurent_power_of_non_monomial_needs_nonnegative_exponent():
    with pytest.raises(AlgebraError):
        (X_A + ONE) ** -1


@settings(max_examples=60, deadline=None)
@given(laurent(), laurent(), laurent())
def test_laurent_ring_axioms_against_sympy(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert sympy.expand(to_sympy(a * b) - to_sympy(a) * to_sympy(b)) == 0
    assert sympy.expand(to_sympy(a - b) - (to_sympy(a) - to_sympy(b))) == 0


@settings(max_examples=60, deadline=None)
@given(laurent(), rationals.filter(bool), rationals.filter(bool), rationals.filter(bool))
def test_evaluate_is_a_ring_homomorphism(a, x, y, z):
    b = a * a + X_B
    assert (a * b).evaluate(x, y, z) == a.evaluate(x, y, z) * b.evaluate(x, y, z)


def test_torus_monomial_matches_generator_factorization():
    # t = t_A^a t_B^b t_C^c t_D^d has u = (a + b, a + c, b + d, c + d)
    for a, b, c, d in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (2, 1, 0, 3), (1, 1, 1, 1)]:
        u = (a + b, a + c, b + d, c + d)
        assert torus_monomial(u) == factor_monomial(a, b, c, d)
        assert factor_monomial(a, b, c, d) == X_A**a * X_B**b * X_C**c * X_D**d


def test_geometric_series_examples():
    assert series_geo_inverse(ONE, 3) == series_from_poly({0: 1, 1: 1, 2: 1, 3: 1}, 3)
    assert series_geo_inverse(X_A, 2) == series_from_poly({0: ONE, 1: X_A, 2: X_A * X_A}, 2)
    prod = TruncatedSeries.one(2)
    for m in (X_A, X_B, X_C, X_D):
        prod = prod * series_geo_inverse(m, 2)
    assert prod.evaluate(1, 1, 1) == series_from_poly({0: 1, 1: 4, 2: 10}, 2)


def test_series_examples():
    one_minus_q = series_from_poly({0: 1, 1: -1}, 2)
    geo = series_from_poly({0: 1, 1: 1, 2: 1}, 2)
    assert series_mul(one_minus_q, geo) == TruncatedSeries.one(2)
    assert series_equal(geo, geo)
    central = series_from_poly({0: ONE, 2: W * Fraction(-1, 3)}, 2)
    quartic = TruncatedSeries.one(2)
    for m in (X_A, X_B, X_C, X_D):
        quartic = quartic * series_geo_inverse(m, 2)
    got = (central * quartic).evaluate(1, 1, 1)
    assert got == series_from_poly({0: 1, 1: 4, 2: 10 - Fraction(1, 3)}, 2)


def test_series_order_mismatch_raises():
    with pytest.raises(AlgebraError):
        TruncatedSeries.one(2) * TruncatedSeries.one(3)


def test_first_difference_reports_degree_and_polynomial():
    a = series_from_poly({0: ONE, 2: X_A}, 3)
    b = series_from_poly({0: ONE, 2: X_B}, 3)
    deg, diff = a.first_difference(b)
    assert deg == 2
    assert diff == X_A - X_B
    assert a.first_difference(a) is None


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([X_A, X_B, X_C, X_D, W, X_A * X_B]), st.integers(0, 6))
def test_geo_inverse_against_sympy(m, K):
    s = series_geo_inverse(m, K)
    expected = sympy.series(1 / (1 - to_sympy(m) * Q), Q, 0, K + 1).removeO()
    assert sympy.expand(series_to_sympy(s) - expected) == 0
    assert series_mul(s, series_from_poly({0: ONE, 1: -m}, K)) == TruncatedSeries.one(K)


def test_to_dict_uses_rational_strings():
    s = series_from_poly({0: ONE, 1: X_A * Fraction(1, 2)}, 1)
    assert s.to_dict() == {"0": {"0,0,0": "1/1"}, "1": {"1,0,0": "1/2"}}
