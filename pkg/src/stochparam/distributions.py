"""Limit laws of the stochasticity parameter.

* the Kolmogorov distribution (law of the supremum of a Brownian bridge),
* the half-normal law (two-point discrete case),
* the almost-sure limsup constants for lacunary sequences {a^x A}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidArgument
from .precision import NamedConstant

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_PI2_OVER_8 = math.pi**2 / 8.0


@dataclass(frozen=True)
class KolmogorovCdf:
    """Evaluator for Phi(x) = sum_k (-1)^k exp(-2 k^2 x^2).

    Below ``crossover_threshold`` the theta-transformed series
    ``sqrt(2 pi)/x * sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2))`` is used; the
    alternating series cancels catastrophically for small x. Both series are
    truncated once the next term drops below ``truncation_tolerance / 2``.
    """

    truncation_tolerance: float = 1e-12
    crossover_threshold: float = 1.0

    def __post_init__(self):
        if not self.truncation_tolerance > 0:
            raise InvalidArgument("truncation_tolerance must be positive")
        if not self.crossover_threshold > 0:
            raise InvalidArgument("crossover_threshold must be positive")

    def alternating(self, x: float) -> float:
        """Raw alternating series, unclamped."""
        total = 1.0
        half_tol = self.truncation_tolerance / 2
        k = 1
        while True:
            term = 2.0 * math.exp(-2.0 * k * k * x * x)
            if term < half_tol:
                return total
            total += -term if k % 2 else term
            k += 1

    def transformed(self, x: float) -> float:
        """Theta-transformed series, unclamped."""
        pref = _SQRT_2PI / x
        half_tol = self.truncation_tolerance / 2
        total = 0.0
        k = 1
        while True:
            term = pref * math.exp(-((2 * k - 1) ** 2) * _PI2_OVER_8 / (x * x))
            if term < half_tol:
                return total
            total += term
            k += 1

    def __call__(self, x: float) -> float:
        x = float(x)
        if not math.isfinite(x):
            raise InvalidArgument(f"Kolmogorov CDF needs a finite argument, got {x}")
        if x <= 0:
            return 0.0
        value = self.transformed(x) if x < self.crossover_threshold else self.alternating(x)
        return min(1.0, max(0.0, value))


_DEFAULT_KOLMOGOROV = KolmogorovCdf()


def kolmogorov_cdf(x: float, evaluator: KolmogorovCdf = _DEFAULT_KOLMOGOROV) -> float:
    """Kolmogorov distribution function Phi(x); 0 for x <= 0."""
    return evaluator(x)


def kolmogorov_quantile(p: float, evaluator: KolmogorovCdf = _DEFAULT_KOLMOGOROV) -> float:
    """Inverse of :func:`kolmogorov_cdf` by bisection on [1e-6, 10]."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidArgument(f"quantile level must lie in (0, 1), got {p}")
    lo, hi = 1e-6, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if evaluator(mid) < p:
            lo = mid
        else:
            hi = mid
    return hi if abs(evaluator(hi) - p) <= abs(evaluator(lo) - p) else lo


@dataclass(frozen=True)
class HalfNormalLaw:
    """Law of |Z| for Z ~ N(0, sigma^2)."""

    sigma: float = 0.5

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidArgument(f"sigma must be positive, got {self.sigma}")

    def cdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return math.erf(x / (self.sigma * math.sqrt(2.0)))

    def __call__(self, x: float) -> float:
        return self.cdf(x)


def half_normal_cdf(x: float, sigma: float = 0.5) -> float:
    """P(|Z| <= x) for Z normal with mean 0 and standard deviation sigma."""
    return HalfNormalLaw(sigma).cdf(x)


def standard_normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Base classes for the lacunary limsup constant.
TWO = "two"
EVEN = "even"
ODD = "odd"
NO_RATIONAL_POWER = "no-rational-power"
RATIONALITY_FLAGS = (TWO, EVEN, ODD, NO_RATIONAL_POWER)


class LilConstantTable:
    """Case table for limsup lambda_n / sqrt(log log n) of {a^x A}, a.e. A."""

    @staticmethod
    def even_formula(a: float) -> float:
        return math.sqrt((a + 1) * a * (a - 2)) / math.sqrt(2 * (a - 1) ** 3)

    @staticmethod
    def odd_formula(a: float) -> float:
        return math.sqrt(a + 1) / math.sqrt(2 * (a - 1))

    def __call__(self, a, rationality: str) -> float:
        if rationality not in RATIONALITY_FLAGS:
            raise InvalidArgument(
                f"rationality flag must be one of {RATIONALITY_FLAGS}, got {rationality!r}")
        integer = _as_integer(a)
        if rationality == TWO:
            if integer != 2:
                raise InvalidArgument(f"flag 'two' requires a = 2, got {a}")
            return math.sqrt(84) / 9
        if rationality == EVEN:
            if integer is None or integer < 4 or integer % 2:
                raise InvalidArgument(f"flag 'even' requires an even integer a >= 4, got {a}")
            return self.even_formula(integer)
        if rationality == ODD:
            if integer is None or integer < 3 or integer % 2 == 0:
                raise InvalidArgument(f"flag 'odd' requires an odd integer a >= 3, got {a}")
            return self.odd_formula(integer)
        check_no_rational_power(a)
        return 1 / math.sqrt(2)


def check_no_rational_power(a) -> None:
    """Reject bases that are provably excluded from the no-rational-power case.

    Exact rationals always fail. Named constants are checked against the
    table of constants with known irrational powers. Other inexact reals
    (floats, MPFR numbers) are taken on the caller's word.
    """
    if isinstance(a, NamedConstant):
        if a.name not in NamedConstant.NO_RATIONAL_POWER:
            raise InvalidArgument(f"constant {a.name} has a rational integer power")
        if not float(a) > 1:
            raise InvalidArgument(f"base must exceed 1, got {a.name}")
        return
    if isinstance(a, (int, Fraction)):
        raise InvalidArgument(f"a = {a} is rational; a^x is rational for every x")
    if not float(a) > 1:
        raise InvalidArgument(f"base must exceed 1, got {a}")


def _as_integer(a):
    if isinstance(a, NamedConstant):
        return None
    if isinstance(a, Fraction):
        return int(a) if a.denominator == 1 else None
    if isinstance(a, int):
        return a
    try:
        f = float(a)
    except (TypeError, ValueError):
        return None
    return int(f) if f.is_integer() else None


def lil_constant(a, rationality: str) -> float:
    """The a.e. limsup constant of lambda_n / sqrt(log log n) for {a^x A}."""
    return LilConstantTable()(a, rationality)


def classify_base(a) -> str:
    """Pick the rationality flag for a base; raise if no case applies."""
    integer = _as_integer(a)
    if integer is not None:
        if integer == 2:
            return TWO
        if integer >= 4 and integer % 2 == 0:
            return EVEN
        if integer >= 3:
            return ODD
        raise InvalidArgument(f"base must exceed 1, got {a}")
    check_no_rational_power(a)
    return NO_RATIONAL_POWER
