import math
from fractions import Fraction

import gmpy2
import pytest

from stochparam.errors import InvalidArgument, ResourceLimit
from stochparam.precision import (PRECISION_CEILING_ENV, NamedConstant, check_precision, constant,
                                  parse_real, precision_ceiling, to_fraction, to_mpfr)


def test_parse_real_forms():
    assert parse_real("37/100") == Fraction(37, 100)
    assert parse_real("0.123") == Fraction(123, 1000)
    assert parse_real(" 7 ") == Fraction(7)
    assert parse_real("E") == NamedConstant("e")
    with pytest.raises(InvalidArgument):
        parse_real("tau")
    with pytest.raises(InvalidArgument):
        parse_real("1/0")


def test_named_constants_at_precision():
    assert abs(float(NamedConstant("pi")) - math.pi) < 1e-15
    assert abs(float(NamedConstant("phi")) - (1 + 5 ** 0.5) / 2) < 1e-15
    v = constant("sqrt2", 400)
    assert v.precision == 400
    with gmpy2.context(gmpy2.get_context(), precision=400):
        assert abs(v * v - 2) < gmpy2.mpfr(2) ** -395
    with pytest.raises(InvalidArgument):
        NamedConstant("gamma")


def test_to_fraction_and_mpfr_roundtrip():
    assert to_fraction(0.5) == Fraction(1, 2)
    assert to_fraction(Fraction(1, 3)) == Fraction(1, 3)
    third = to_mpfr(Fraction(1, 3), 200)
    assert abs(to_fraction(third) - Fraction(1, 3)) < Fraction(1, 2**199)
    e256 = to_fraction(NamedConstant("e"), 256)
    assert abs(float(e256) - math.e) < 1e-15


def test_precision_ceiling(monkeypatch):
    monkeypatch.delenv(PRECISION_CEILING_ENV, raising=False)
    assert precision_ceiling() == 10**6
    assert check_precision(1000) == 1000
    monkeypatch.setenv(PRECISION_CEILING_ENV, "128")
    with pytest.raises(ResourceLimit, match=PRECISION_CEILING_ENV):
        check_precision(129, "test")
    monkeypatch.setenv(PRECISION_CEILING_ENV, "lots")
    with pytest.raises(InvalidArgument):
        precision_ceiling()
