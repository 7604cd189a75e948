"""Multiple-precision helpers: named constants, real-parameter parsing and
the working-precision ceiling.

Real parameters are either exact (``fractions.Fraction``) or named
constants evaluated on demand to a requested number of bits. Everything
inexact goes through MPFR via ``gmpy2``.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from fractions import Fraction
from typing import Union

import gmpy2

from .errors import InvalidArgument, ResourceLimit

PRECISION_CEILING_ENV = "STOCHPARAM_MAX_PRECISION_BITS"
DEFAULT_PRECISION_CEILING = 10**6
GUARD_BITS = 32

Real = Union[int, float, Fraction, "gmpy2.mpfr", "NamedConstant"]


class NamedConstant:
    """A transcendental or algebraic constant known by name.

    The value is recomputed at whatever precision the caller asks for, so a
    single instance can feed computations at any working precision.
    """

    _TABLE = {
        "e": lambda: gmpy2.exp(1),
        "pi": gmpy2.const_pi,
        "sqrt2": lambda: gmpy2.sqrt(2),
        "sqrt3": lambda: gmpy2.sqrt(3),
        "phi": lambda: (1 + gmpy2.sqrt(5)) / 2,
        "ln2": gmpy2.const_log2,
    }
    # constants known to have no rational positive integer power
    NO_RATIONAL_POWER = frozenset({"e", "pi", "phi", "ln2"})

    def __init__(self, name: str):
        if name not in self._TABLE:
            raise InvalidArgument(
                f"unknown constant {name!r}; known: {', '.join(sorted(self._TABLE))}")
        self.name = name

    def evaluate(self, bits: int) -> gmpy2.mpfr:
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            return self._TABLE[self.name]()

    def __float__(self) -> float:
        return float(self.evaluate(64))

    def __repr__(self) -> str:
        return f"NamedConstant({self.name!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, NamedConstant) and other.name == self.name

    def __hash__(self) -> int:
        return hash(("NamedConstant", self.name))


def constant(name: str, bits: int) -> gmpy2.mpfr:
    """Value of the named constant ``name`` with ``bits`` bits of precision."""
    return NamedConstant(name).evaluate(bits)


def parse_real(text: str) -> Fraction | NamedConstant:
    """Parse a real parameter given on the command line or in a config.

    Accepts a constant name (``e``, ``pi``, ``sqrt2``, ``phi``, ...), a
    rational ``p/q`` or a decimal literal. Decimals and rationals are kept
    exact.
    """
    text = str(text).strip()
    if text.lower() in NamedConstant._TABLE:
        return NamedConstant(text.lower())
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidArgument(f"cannot parse real value {text!r}") from exc


def to_mpfr(value: Real, bits: int) -> gmpy2.mpfr:
    """Round ``value`` to an MPFR number with ``bits`` bits."""
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        if isinstance(value, NamedConstant):
            return value.evaluate(bits)
        if isinstance(value, Fraction):
            return gmpy2.mpfr(gmpy2.mpq(value.numerator, value.denominator))
        return gmpy2.mpfr(value)


def to_fraction(value: Real, bits: int = 256) -> Fraction:
    """Exact rational for ``value``; named constants are rounded to ``bits``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, NamedConstant):
        value = value.evaluate(bits)
    if isinstance(value, float):
        return Fraction(value)
    num, den = value.as_integer_ratio()
    return Fraction(int(num), int(den))


def is_exact(value: Real) -> bool:
    return isinstance(value, (int, Fraction))


def log2_of(value: Real) -> float:
    """log2 of a positive real, to double accuracy."""
    if isinstance(value, Fraction):
        return math.log2(value.numerator) - math.log2(value.denominator)
    return math.log2(float(value))


def precision_ceiling() -> int:
    raw = os.environ.get(PRECISION_CEILING_ENV)
    if raw is None:
        return DEFAULT_PRECISION_CEILING
    try:
        return int(raw)
    except ValueError as exc:
        raise InvalidArgument(f"{PRECISION_CEILING_ENV}={raw!r} is not an integer") from exc


def check_precision(bits: int, what: str = "computation") -> int:
    limit = precision_ceiling()
    if bits > limit:
        raise ResourceLimit(
            f"{what} needs {bits} bits of working precision, above the ceiling of "
            f"{limit} bits (raise it with {PRECISION_CEILING_ENV})")
    return bits


@contextmanager
def working_precision(bits: int):
    with gmpy2.context(gmpy2.get_context(), precision=bits) as ctx:
        yield ctx
