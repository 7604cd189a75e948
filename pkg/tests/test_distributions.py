import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from stochparam.distributions import (EVEN, NO_RATIONAL_POWER, ODD, TWO, HalfNormalLaw,
                                      KolmogorovCdf, LilConstantTable, check_no_rational_power,
                                      classify_base, half_normal_cdf, kolmogorov_cdf,
                                      kolmogorov_quantile, lil_constant, standard_normal_cdf)
from stochparam.errors import InvalidArgument
from stochparam.precision import NamedConstant
from fractions import Fraction

mpmath.mp.dps = 40


def phi_oracle(x):
    """Alternating series summed at 40 digits; exact enough for any x >= 0.05."""
    x = mpmath.mpf(x)
    return float(mpmath.nsum(lambda k: (-1) ** int(k) * mpmath.exp(-2 * k * k * x * x), [-mpmath.inf, mpmath.inf]))


@pytest.mark.parametrize("x", [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.999, 1.0, 1.001, 1.36, 2.0, 3.5, 6.0])
def test_phi_matches_high_precision_oracle(x):
    assert abs(kolmogorov_cdf(x) - phi_oracle(x)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.05, max_value=8.0))
def test_phi_property_oracle(x):
    assert abs(kolmogorov_cdf(x) - phi_oracle(x)) < 1e-12


def test_phi_scipy_kolmogorov_agrees():
    from scipy.special import kolmogorov
    for x in (0.2, 0.6, 0.8276, 1.2, 1.8):
        assert abs(kolmogorov_cdf(x) - (1 - kolmogorov(x))) < 1e-12


def test_both_series_agree_near_crossover():
    ev = KolmogorovCdf()
    for x in (0.6, 0.8, 1.0, 1.2, 1.5):
        assert abs(ev.alternating(x) - ev.transformed(x)) < 1e-12


def test_phi_reference_values():
    assert 0.28 <= kolmogorov_cdf(0.70) <= 0.30
    assert kolmogorov_cdf(0.33) < 1e-3
    assert kolmogorov_cdf(1.8) - kolmogorov_cdf(0.4) > 0.99
    # median of the Kolmogorov law
    assert abs(kolmogorov_quantile(0.5) - 0.8275735551899) < 1e-9


def test_phi_edges():
    assert kolmogorov_cdf(0) == 0.0
    assert kolmogorov_cdf(-3) == 0.0
    assert kolmogorov_cdf(1e-3) == 0.0
    assert kolmogorov_cdf(50) == 1.0
    for bad in (math.nan, math.inf, -math.inf):
        with pytest.raises(InvalidArgument):
            kolmogorov_cdf(bad)


def test_phi_is_monotone_and_bounded():
    xs = [i / 200 for i in range(1, 1200)]
    vals = [kolmogorov_cdf(x) for x in xs]
    assert all(0 <= v <= 1 for v in vals)
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("p", [1e-6, 0.01, 0.3, 0.5, 0.9, 0.99, 1 - 1e-9])
def test_quantile_inverts_cdf(p):
    assert abs(kolmogorov_cdf(kolmogorov_quantile(p)) - p) < 1e-10


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_rejects_out_of_range(p):
    with pytest.raises(InvalidArgument):
        kolmogorov_quantile(p)


def test_evaluator_validation():
    with pytest.raises(InvalidArgument):
        KolmogorovCdf(truncation_tolerance=0)
    with pytest.raises(InvalidArgument):
        KolmogorovCdf(crossover_threshold=-1)


def test_half_normal():
    assert half_normal_cdf(0) == 0.0
    assert half_normal_cdf(-1) == 0.0
    # P(|Z| <= sigma) = erf(1/sqrt 2)
    assert abs(half_normal_cdf(0.5) - math.erf(1 / math.sqrt(2))) < 1e-15
    assert abs(half_normal_cdf(1.0, 1.0) - (2 * standard_normal_cdf(1.0) - 1)) < 1e-15
    with pytest.raises(InvalidArgument):
        HalfNormalLaw(0)


def test_lil_constants():
    assert lil_constant(2, TWO) == pytest.approx(math.sqrt(84) / 9, abs=1e-15)
    assert lil_constant(4, EVEN) == pytest.approx(math.sqrt(5 * 4 * 2) / math.sqrt(2 * 27), abs=1e-15)
    assert lil_constant(3, ODD) == pytest.approx(1.0, abs=1e-15)
    assert lil_constant(NamedConstant("e"), NO_RATIONAL_POWER) == pytest.approx(1 / math.sqrt(2))
    # odd and even formulas both tend to 1/sqrt(2)
    table = LilConstantTable()
    assert table.odd_formula(10**9 + 1) == pytest.approx(1 / math.sqrt(2), abs=1e-8)
    assert table.even_formula(10**9) == pytest.approx(1 / math.sqrt(2), abs=1e-8)


@pytest.mark.parametrize("a,flag", [(3, TWO), (2, EVEN), (6, ODD), (5, EVEN), (2, "bogus"),
                                    (2, NO_RATIONAL_POWER), (NamedConstant("sqrt2"), NO_RATIONAL_POWER)])
def test_lil_constant_rejects_wrong_flag(a, flag):
    with pytest.raises(InvalidArgument):
        lil_constant(a, flag)


def test_classify_base():
    assert classify_base(2) == TWO
    assert classify_base(Fraction(8)) == EVEN
    assert classify_base(9) == ODD
    assert classify_base(NamedConstant("pi")) == NO_RATIONAL_POWER


def test_check_no_rational_power():
    check_no_rational_power(NamedConstant("e"))
    check_no_rational_power(2.5)
    for bad in (2, Fraction(5, 2), NamedConstant("sqrt3"), 0.5):
        with pytest.raises(InvalidArgument):
            check_no_rational_power(bad)
