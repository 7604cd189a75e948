import math
from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, settings, strategies as st

from stochparam.contfrac import (GaussKuzminTable, discrepancy_bound_from_quotients, expand, fold,
                                 gauss_kuzmin_frequencies, gauss_kuzmin_mass, metric_rate_check,
                                 random_real_quotients, star_discrepancy_of_multiples)
from stochparam.errors import InvalidArgument, ResourceLimit
from stochparam.precision import NamedConstant, to_fraction


def euclid(p, q):
    """Oracle: partial quotients of p/q by the Euclidean algorithm."""
    out = []
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return out[0], out[1:]


def test_named_examples():
    phi = expand(NamedConstant("phi"), 40)
    assert phi.a0 == 1 and set(phi.partial_quotients) == {1} and len(phi.partial_quotients) == 40
    root2 = expand(NamedConstant("sqrt2"), 50)
    assert root2.a0 == 1 and set(root2.partial_quotients) == {2}
    e = expand(NamedConstant("e"), 12)
    assert (e.a0, e.partial_quotients) == (2, (1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, 1))
    pi = expand(NamedConstant("pi"), 5)
    assert (pi.a0, pi.partial_quotients) == (3, (7, 15, 1, 292, 1))
    assert not (phi.truncated or phi.terminated)


def test_rational_example():
    cf = expand(Fraction(37, 100))
    assert (cf.a0, list(cf.partial_quotients)) == euclid(37, 100) == (0, [2, 1, 2, 2, 1, 3])
    assert cf.terminated and cf.value() == Fraction(37, 100)


@settings(max_examples=300, deadline=None)
@given(st.integers(-10**12, 10**12), st.integers(1, 10**12))
def test_rational_roundtrip(p, q):
    k = Fraction(p, q)
    cf = expand(k, max_terms=200)
    assert cf.terminated
    a0, qs = euclid(k.numerator, k.denominator)
    # Euclid may end with a final 1 folded differently; values must agree exactly
    assert fold(cf.a0, cf.partial_quotients) == k == fold(a0, qs)
    assert cf.value() == k


@pytest.mark.parametrize("k", ["e", "pi", "sqrt2", "sqrt3", "phi", "ln2"])
def test_convergent_invariants(k):
    c = NamedConstant(k)
    cf = expand(c, 60)
    exact = to_fraction(c, 2000)
    conv = cf.convergents
    for i in range(2, len(conv)):
        a = cf.partial_quotients[i - 1]
        assert conv[i][0] == a * conv[i - 1][0] + conv[i - 2][0]
        assert conv[i][1] == a * conv[i - 1][1] + conv[i - 2][1]
    for i in range(len(conv) - 1):
        p, q = conv[i]
        assert abs(exact - Fraction(p, q)) < Fraction(1, q * conv[i + 1][1])
        # even convergents below, odd above
        assert (Fraction(p, q) <= exact) == (i % 2 == 0)
    assert all(a >= 1 for a in cf.partial_quotients)


def test_fixed_precision_truncates():
    cf = expand(NamedConstant("pi"), 200, bits=128)
    assert cf.truncated and len(cf.partial_quotients) < 200
    assert cf.source_precision_bits == 128
    # the certified prefix is correct
    full = expand(NamedConstant("pi"), 200)
    assert full.partial_quotients[: len(cf.partial_quotients)] == cf.partial_quotients


def test_float_input_uses_one_ulp_enclosure():
    cf = expand(math.sqrt(2), 50)
    assert cf.truncated and set(cf.partial_quotients) == {2}
    with gmpy2.context(gmpy2.get_context(), precision=300):
        root = gmpy2.sqrt(2)
    cf = expand(root, 50)
    assert set(cf.partial_quotients) == {2} and len(cf.partial_quotients) == 50
    assert cf.source_precision_bits == 300


def test_expand_validation():
    with pytest.raises(InvalidArgument):
        expand(Fraction(1, 2), 0)


def test_gauss_kuzmin_golden_ratio():
    table = gauss_kuzmin_frequencies(expand(NamedConstant("phi"), 1000), j_max=5)
    assert table.frequencies[1] == 1.0
    assert all(table.frequencies[j] == 0 for j in range(2, 6))
    assert table.overflow == 0.0


def test_gauss_kuzmin_random_reals():
    quotients = random_real_quotients(500, 200, seed=3)
    table = gauss_kuzmin_frequencies(quotients, j_max=10)
    assert table.total == 100_000
    assert abs(table.frequencies[1] - math.log2(4 / 3)) < 0.01
    assert math.isclose(sum(table.frequencies.values()) + table.overflow, 1.0)
    assert math.isclose(sum(table.theoretical.values()) + table.theoretical_overflow, 1.0)
    assert gauss_kuzmin_mass(1) == pytest.approx(0.41503749927884376)


def test_gauss_kuzmin_overflow_and_validation():
    table = gauss_kuzmin_frequencies([[1, 5, 100]] * 400, j_max=3)
    assert isinstance(table, GaussKuzminTable)
    assert table.overflow == pytest.approx(2 / 3)
    with pytest.raises(InvalidArgument):
        gauss_kuzmin_frequencies([1, 2, 3])


def test_bound_golden_fibonacci():
    cf = expand(NamedConstant("phi"), 40)
    qs = cf.denominators
    for m in range(1, 25):
        n = qs[m]
        if qs[m - 1] == n:
            continue
        bound = discrepancy_bound_from_quotients(cf, n)
        assert bound == 3 * (m + 1)
        assert star_discrepancy_of_multiples(NamedConstant("phi"), n) <= bound


@pytest.mark.parametrize("k", ["phi", "sqrt2", "e", "pi", "ln2"])
def test_bound_dominates_exact(k):
    c = NamedConstant(k)
    cf = expand(c, 60)
    for n in (1, 2, 3, 5, 10, 37, 100, 999, 4096, 30_000):
        assert star_discrepancy_of_multiples(c, n) <= discrepancy_bound_from_quotients(cf, n) + 1e-9


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 2000), st.integers(2, 2000), st.integers(1, 5000))
def test_bound_dominates_exact_rational(p, q, n):
    k = Fraction(p % q or 1, q)
    cf = expand(k)
    assert star_discrepancy_of_multiples(k, n) <= discrepancy_bound_from_quotients(cf, n) + 1e-9


def test_bound_rational_periodic_and_needs_terms():
    cf = expand(Fraction(37, 100))
    assert math.isfinite(discrepancy_bound_from_quotients(cf, 10_000))
    short = expand(NamedConstant("phi"), 5)
    with pytest.raises(ResourceLimit):
        discrepancy_bound_from_quotients(short, 10**6)
    with pytest.raises(InvalidArgument):
        discrepancy_bound_from_quotients(short, 0)
    assert discrepancy_bound_from_quotients(short, 1) >= star_discrepancy_of_multiples(NamedConstant("phi"), 1)


def test_metric_rate_check():
    grid = [2**j for j in range(4, 21)]
    report = metric_rate_check([NamedConstant("phi"), Fraction(1, 2)], 0.1, grid)
    phi_row, half_row = report.rows
    assert not phi_row["flagged"]
    top = phi_row["rates"][len(grid) // 2:]
    assert top[-1] < max(phi_row["rates"][:4])
    # the rational step is measured against its own two support points: rates vanish
    assert half_row["rates"][-1] == 0.0 and not half_row["flagged"]
    assert report.as_dict()["flagged"] == 0


def test_metric_rate_random_steps():
    import numpy as np
    rng = np.random.default_rng(8)
    ks = [float(v) for v in rng.random(100)]
    # a dyadic grid; the flag needs a strict rise over the whole top half
    report = metric_rate_check(ks, 0.5, [2**j for j in range(4, 17)])
    assert len(report.rows) == 100
    assert 100 - report.flagged >= 95


@pytest.mark.parametrize("grid,eps", [([8, 32], 0.1), ([64, 32], 0.1), ([16, 32], 0.0)])
def test_metric_rate_validation(grid, eps):
    with pytest.raises(InvalidArgument):
        metric_rate_check([0.3], eps, grid)
