"""Generators for the deterministic sequences under study.

Arithmetic progressions kx mod N, integer geometric progressions a^x A mod N
and their periods, real geometric (lacunary) progressions evaluated with
controlled MPFR precision, i.i.d. uniform reference samples and digit-block
counts in base-b expansions.

By default terms are indexed from x = 1; pass ``from_zero=True`` to start at
x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
import numpy as np

from . import rng as _rng
from .counting import Sample
from .errors import InvalidArgument, ResourceLimit
from .precision import (GUARD_BITS, NamedConstant, check_precision, is_exact, log2_of,
                        to_fraction, to_mpfr, working_precision)

RealParam = Union[int, float, Fraction, NamedConstant, "gmpy2.mpfr"]


def _exponents(n: int, from_zero: bool) -> range:
    return range(0, n) if from_zero else range(1, n + 1)


# -- arithmetic progressions -------------------------------------------------


@dataclass(frozen=True)
class ArithmeticSpec:
    k: RealParam
    N: RealParam = 1
    n: int = 1
    offset: RealParam = 0
    from_zero: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"length n must be a positive integer, got {self.n}")
        if not float(self.N) > 0:
            raise InvalidArgument(f"modulus must be positive, got {self.N}")
        for name in ("k", "N", "offset"):
            value = getattr(self, name)
            if isinstance(value, int) and not isinstance(value, bool):
                object.__setattr__(self, name, Fraction(value))


def arithmetic_terms(spec: ArithmeticSpec) -> np.ndarray:
    """(offset + k x) mod N in generation order, as floats."""
    xs = _exponents(spec.n, spec.from_zero)
    if all(is_exact(v) for v in (spec.k, spec.N, spec.offset)):
        ratio = spec.k / spec.N
        shift = spec.offset / spec.N
        den = ratio.denominator * shift.denominator // math.gcd(ratio.denominator, shift.denominator)
        R = ratio.numerator * (den // ratio.denominator)
        S = shift.numerator * (den // shift.denominator)
        num, nden = spec.N.numerator, spec.N.denominator * den
        # int / int is correctly rounded in Python
        return np.array([(num * ((S + R * x) % den)) / nden for x in xs], dtype=float)
    # fixed point: the fractional part of (offset + k x) / N to 2^-frac_bits
    frac_bits = max(1, math.ceil(math.log2(spec.n + 1))) + 64 + GUARD_BITS
    top = abs(float(spec.k) / float(spec.N)) * spec.n + abs(float(spec.offset) / float(spec.N)) + 2
    bits = frac_bits + max(1, math.ceil(math.log2(top)))
    with working_precision(bits):
        N = to_mpfr(spec.N, bits)
        R = int(gmpy2.floor(to_mpfr(spec.k, bits) / N * (gmpy2.mpz(1) << frac_bits)))
        S = int(gmpy2.floor(to_mpfr(spec.offset, bits) / N * (gmpy2.mpz(1) << frac_bits)))
    mask = (1 << frac_bits) - 1
    scale = 1 << frac_bits
    n_float = float(spec.N)
    return np.array([((S + R * x) & mask) / scale for x in xs], dtype=float) * n_float


def arithmetic_mod(spec: ArithmeticSpec) -> Sample:
    """Sample {(offset + k x) mod N} over [0, N]."""
    vals = arithmetic_terms(spec)
    return Sample(np.minimum(vals, float(spec.N)), 0.0, float(spec.N),
                  {"family": "arithmetic", "k": str(spec.k), "N": str(spec.N), "n": spec.n})


# -- integer geometric progressions ----------------------------------------------


@dataclass(frozen=True)
class GeometricIntSpec:
    a: int
    A: int
    N: int
    n: int
    from_zero: bool = False

    def __post_init__(self):
        for name in ("a", "A", "N", "n"):
            if int(getattr(self, name)) != getattr(self, name):
                raise InvalidArgument(f"{name} must be an integer")
        if self.N < 1:
            raise InvalidArgument(f"modulus must be positive, got {self.N}")
        if not 1 < self.a < self.N:
            raise InvalidArgument(f"ratio must satisfy 1 < a < N, got a={self.a}, N={self.N}")
        if self.n < 1:
            raise InvalidArgument(f"length n must be positive, got {self.n}")


def geometric_int_terms(spec: GeometricIntSpec) -> list[int]:
    """a^x A mod N in generation order (exact integer arithmetic)."""
    a, N = int(spec.a), int(spec.N)
    t = int(spec.A) % N
    if not spec.from_zero:
        t = t * a % N
    out = []
    for _ in range(spec.n):
        out.append(t)
        t = t * a % N
    return out


def geometric_int_mod(spec: GeometricIntSpec) -> Sample:
    return Sample(np.array(geometric_int_terms(spec), dtype=float), 0.0, float(spec.N),
                  {"family": "geometric-int", "a": spec.a, "A": spec.A, "N": spec.N, "n": spec.n})


@dataclass(frozen=True)
class PeriodResult:
    period: int
    preperiod: int


def multiplicative_period(a: int, A: int, N: int) -> PeriodResult:
    """Period and preperiod of x -> a^x A mod N, x = 0, 1, 2, ...

    Brent's cycle detection, so memory stays constant however long the orbit.
    """
    a, A, N = int(a), int(A), int(N)
    if N < 1:
        raise InvalidArgument(f"modulus must be positive, got {N}")
    if a < 2:
        raise InvalidArgument(f"ratio must exceed 1, got a={a}")
    x0 = A % N

    def step(v):
        return v * a % N

    power = lam = 1
    tortoise, hare = x0, step(x0)
    while tortoise != hare:
        if power == lam:
            tortoise = hare
            power *= 2
            lam = 0
        hare = step(hare)
        lam += 1
    tortoise = hare = x0
    for _ in range(lam):
        hare = step(hare)
    mu = 0
    while tortoise != hare:
        tortoise, hare = step(tortoise), step(hare)
        mu += 1
    return PeriodResult(lam, mu)


# -- real geometric progressions -----------------------------------------------------


@dataclass(frozen=True)
class GeometricRealSpec:
    a: RealParam
    A: RealParam
    N: RealParam = 1
    n: int = 1
    output_bits: int = 64
    from_zero: bool = False

    def __post_init__(self):
        if not float(self.a) > 1:
            raise InvalidArgument(f"ratio must exceed 1, got {self.a}")
        if not float(self.A) > 0:
            raise InvalidArgument(f"start must be positive, got {self.A}")
        if not float(self.N) > 0:
            raise InvalidArgument(f"modulus must be positive, got {self.N}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgument(f"length n must be a positive integer, got {self.n}")
        if self.output_bits < 1:
            raise InvalidArgument("output_bits must be positive")

    def working_bits(self) -> int:
        """ceil(n log2 a) + max(0, ceil(log2(A/N + 1))) + output_bits + guard."""
        growth = math.ceil(self.n * log2_of(self.a))
        start = max(0, math.ceil(math.log2(float(self.A) / float(self.N) + 1)))
        return growth + start + self.output_bits + GUARD_BITS


def geometric_real_terms(spec: GeometricRealSpec, bits: int | None = None) -> list:
    """a^x A mod N as MPFR numbers, by repeated multiplication.

    Terms are correct modulo N to ``output_bits`` bits; a result within
    2^-(output_bits+16) N of N is reported as 0, its circular equivalent.
    ``bits`` overrides the working precision (it is never lowered below the
    policy value). Raises :class:`ResourceLimit` above the precision ceiling.
    """
    policy = spec.working_bits()
    bits = max(policy, bits or 0)
    check_precision(bits, f"geometric sequence with n={spec.n}")
    with working_precision(bits):
        a = to_mpfr(spec.a, bits)
        N = to_mpfr(spec.N, bits)
        t = to_mpfr(spec.A, bits)
        wrap = N - N * gmpy2.exp2(-(spec.output_bits + 16))

        def reduce(v):
            r = gmpy2.frac(v) if N == 1 else gmpy2.fmod(v, N)
            return gmpy2.mpfr(0) if r >= wrap else r

        if not spec.from_zero:
            t = t * a
        out = []
        for _ in range(spec.n):
            out.append(reduce(t))
            t = t * a
        return out


def geometric_real_mod(spec: GeometricRealSpec) -> Sample:
    """Sample {a^x A mod N} over [0, N] rounded to doubles."""
    terms = geometric_real_terms(spec)
    N = float(spec.N)
    vals = np.minimum(np.array([float(t) for t in terms]), N)
    return Sample(vals, 0.0, N, {"family": "geometric-real", "a": str(spec.a), "A": str(spec.A),
                                 "N": str(spec.N), "n": spec.n,
                                 "working_bits": spec.working_bits()})


def lacunary_digit_terms(a: int, n: int, rng: np.random.Generator, bits: int = 64):
    """{a^x A}, x = 1..n, for a uniformly random A with integer base ``a``.

    A is drawn through its base-a digits d_1 .. d_{n+J} (i.i.d. uniform), so
    {a^x A} = sum_j d_{x+j} a^{-j} is read off a sliding window of J digits
    with J chosen so the truncation error is below 2^-bits. Cost is O(n J)
    and independent of the size of a^n. Returns (terms, digits).
    """
    a = int(a)
    if a < 2:
        raise InvalidArgument(f"digit path needs an integer base >= 2, got {a}")
    window = math.ceil(bits / math.log2(a)) + 1
    digits = rng.integers(0, a, size=n + window)
    vals = np.zeros(n)
    for j in range(window, 0, -1):
        vals = (vals + digits[j: j + n]) / a
    return vals, digits


# -- i.i.d. reference samples ---------------------------------------------------------


def iid_uniform(n: int, lo: float = 0.0, hi: float = 1.0, seed: int = 0) -> Sample:
    if not lo < hi:
        raise InvalidArgument(f"need lo < hi, got [{lo}, {hi}]")
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n}")
    gen = _rng.make_rng(seed)
    vals = lo + (hi - lo) * gen.random(int(n))
    return Sample(vals, lo, hi, {"family": "iid-uniform", **_rng.metadata(seed)})


# -- digit blocks of normal-number candidates -----------------------------------------


def _exact_unit_real(A, needed_bits: int) -> Fraction:
    if isinstance(A, str):
        try:
            A = Fraction(A)
        except ValueError as exc:
            raise InvalidArgument(f"cannot parse {A!r} as a real") from exc
    if isinstance(A, float):
        A = gmpy2.mpfr(A, 53)
    if isinstance(A, NamedConstant):
        A = A.evaluate(needed_bits)
    if not is_exact(A):
        if A.precision < needed_bits:
            raise ResourceLimit(
                f"A carries {A.precision} bits but {needed_bits} are needed for this many digits")
    value = to_fraction(A)
    if not 0 <= value < 1:
        raise InvalidArgument(f"A must lie in [0, 1), got {float(value)}")
    return value


def base_digits(A: Fraction, base: int, n: int) -> list[int]:
    """First n base-b digits of A after the radix point."""
    scaled = A.numerator * base**n // A.denominator
    out = []
    for _ in range(n):
        scaled, d = divmod(scaled, base)
        out.append(d)
    return out[::-1]


def digit_block_count(A, base: int, block: str, n: int) -> int:
    """Occurrences of ``block`` among the first n base-b digits of A.

    Counted twice, by scanning the digit string and as the indicator sum
    sum_m 1[v/b^l, (v+1)/b^l)({b^m A}) over the n - l + 1 block positions
    inside the first n digits; the two must agree.
    """
    if base < 2 or base > 36:
        raise InvalidArgument(f"base must lie in [2, 36], got {base}")
    if not block:
        raise InvalidArgument("block must be non-empty")
    try:
        block_digits = [int(c, 36) for c in block]
    except ValueError as exc:
        raise InvalidArgument(f"invalid digit in block {block!r}") from exc
    if any(d >= base for d in block_digits):
        raise InvalidArgument(f"block {block!r} has digits outside base {base}")
    if n < 1:
        raise InvalidArgument("n must be positive")
    value = _exact_unit_real(A, math.ceil(n * math.log2(base)) + 64)
    length = len(block_digits)

    digits = base_digits(value, base, n)
    scan = sum(1 for m in range(n - length + 1) if digits[m: m + length] == block_digits)

    v = 0
    for d in block_digits:
        v = v * base + d
    lo, hi = Fraction(v, base**length), Fraction(v + 1, base**length)
    p, q = value.numerator, value.denominator
    indicator = 0
    for m in range(n - length + 1):
        frac = Fraction(p * base**m % q, q)
        indicator += lo <= frac < hi
    if scan != indicator:
        raise AssertionError(f"digit scan ({scan}) and indicator sum ({indicator}) disagree")
    return scan
