"""Continued fractions of step sizes and discrepancy of {k x}.

Expansions of inexact reals are certified: the Gauss map z -> {1/z} runs
on a rational enclosure of k, and a partial quotient is emitted only when
both ends of the enclosure agree on it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import rng as _rng
from .counting import DiscreteUniform, Sample, star_discrepancy, sup_deviation
from .errors import InvalidArgument, ResourceLimit
from .precision import NamedConstant, check_precision, is_exact, precision_ceiling, to_fraction
from .sequences import ArithmeticSpec, arithmetic_terms

OSTROWSKI_CONSTANT = 3


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    a0: int
    partial_quotients: tuple
    convergents: tuple  # ((p_0, q_0), (p_1, q_1), ...) as exact integer pairs
    source_precision_bits: int | None = None
    truncated: bool = False  # precision ran out before max_terms
    terminated: bool = False  # the expansion of a rational ended

    @property
    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]

    def value(self) -> Fraction:
        """The last convergent as an exact fraction."""
        p, q = self.convergents[-1]
        return Fraction(p, q)

    def as_dict(self) -> dict:
        return {"a0": self.a0, "partial_quotients": list(self.partial_quotients),
                "convergents": [list(c) for c in self.convergents],
                "source_precision_bits": self.source_precision_bits,
                "truncated": self.truncated, "terminated": self.terminated}


def fold(a0: int, quotients: Sequence[int]) -> Fraction:
    """Evaluate [a0; a1, ..., am] exactly."""
    value = None
    for a in reversed(quotients):
        value = Fraction(a) if value is None else a + 1 / value
    if value is None:
        return Fraction(a0)
    return a0 + 1 / value


def _convergents(a0: int, quotients: Sequence[int]) -> tuple:
    p_prev, q_prev = 1, 0
    p, q = a0, 1
    out = [(p, q)]
    for a in quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return tuple(out)


def _expand_interval(lo: Fraction, hi: Fraction, max_terms: int):
    """Gauss map on [lo, hi]; returns (a0, quotients, truncated, terminated)."""
    a0 = math.floor(lo)
    if math.floor(hi) != a0:
        raise ResourceLimit("enclosure too wide to certify even the integer part")
    lo, hi = lo - a0, hi - a0
    quotients = []
    while len(quotients) < max_terms:
        if hi == 0:
            return a0, quotients, False, True
        if lo == 0:
            return a0, quotients, True, False
        # z -> 1/z reverses the enclosure
        lo, hi = 1 / hi, 1 / lo
        a = math.floor(lo)
        if math.floor(hi) != a:
            return a0, quotients, True, False
        quotients.append(a)
        lo, hi = lo - a, hi - a
    return a0, quotients, False, hi == 0


def expand(k, max_terms: int = 50, bits: int | None = None) -> ContinuedFractionExpansion:
    """Continued fraction expansion of k with up to ``max_terms`` partial quotients.

    Exact rationals (``int``/``Fraction``) expand exactly and terminate.
    Named constants are evaluated at ``bits`` bits (by default doubling from
    8 * max_terms + 64 until enough quotients are certified); other inexact
    reals are taken as known to within one unit in the last place.
    """
    if max_terms < 1:
        raise InvalidArgument("max_terms must be positive")
    if is_exact(k):
        k = Fraction(k)
        a0, qs, trunc, term = _expand_interval(k, k, max_terms)
        return ContinuedFractionExpansion(a0, tuple(qs), _convergents(a0, qs), None, trunc, term)
    if isinstance(k, NamedConstant):
        adaptive = bits is None
        bits = bits or 8 * max_terms + 64
        while True:
            check_precision(bits, f"expansion of {k.name}")
            centre = to_fraction(k, bits)
            ulp = _ulp(centre, bits)
            a0, qs, trunc, term = _expand_interval(centre - ulp, centre + ulp, max_terms)
            if not (trunc and adaptive and 2 * bits <= precision_ceiling()):
                break
            bits *= 2
        return ContinuedFractionExpansion(a0, tuple(qs), _convergents(a0, qs), bits, trunc, term)
    centre = to_fraction(k)
    bits = getattr(k, "precision", 53)
    ulp = _ulp(centre, bits)
    a0, qs, trunc, term = _expand_interval(centre - ulp, centre + ulp, max_terms)
    return ContinuedFractionExpansion(a0, tuple(qs), _convergents(a0, qs), bits, trunc, term)


def _ulp(x: Fraction, bits: int) -> Fraction:
    mag = abs(x)
    exponent = (mag.numerator.bit_length() - mag.denominator.bit_length() + 1) if mag else 0
    return Fraction(2) ** (exponent - bits)


def random_real_quotients(count: int, terms: int, seed: int) -> list[list[int]]:
    """Certified partial quotients of ``count`` uniform random reals in (0, 1).

    Each real is known only through a dyadic interval [m/2^B, (m+1)/2^B],
    which is exactly what a uniform draw at finite resolution provides; B is
    increased until every real yields ``terms`` certified quotients.
    """
    gen = _rng.make_rng(seed, 0xCF)
    out = []
    for _ in range(count):
        bits = 8 * terms + 64
        words = gen.bit_generator.random_raw(math.ceil(bits / 64))
        m = 0
        for w in words:
            m = (m << 64) | int(w)
        total = 64 * len(words)
        while True:
            lo, hi = Fraction(m, 1 << total), Fraction(m + 1, 1 << total)
            _, qs, _, _ = _expand_interval(lo, hi, terms)
            if len(qs) == terms:
                break
            extra = int(gen.bit_generator.random_raw())
            m = (m << 64) | extra
            total += 64
        out.append(qs)
    return out


@dataclass(frozen=True)
class GaussKuzminTable:
    j_max: int
    total: int
    frequencies: dict  # j -> empirical frequency, j = 1..j_max
    overflow: float  # empirical mass of quotients > j_max
    theoretical: dict  # j -> log2(1 + 1/(j (j + 2)))
    theoretical_overflow: float

    def as_dict(self) -> dict:
        return {"j_max": self.j_max, "total": self.total,
                "frequencies": {str(j): f for j, f in self.frequencies.items()},
                "overflow": self.overflow,
                "theoretical": {str(j): f for j, f in self.theoretical.items()},
                "theoretical_overflow": self.theoretical_overflow}


def gauss_kuzmin_mass(j: int) -> float:
    return math.log2(1 + 1 / (j * (j + 2)))


def gauss_kuzmin_frequencies(source, j_max: int = 10, min_quotients: int = 1000) -> GaussKuzminTable:
    """Empirical frequencies of partial quotients against the Gauss-Kuzmin law.

    ``source`` is an expansion, a list of expansions, or an iterable of
    partial quotients (possibly nested per real).
    """
    quotients = _pool(source)
    if len(quotients) < min_quotients:
        raise InvalidArgument(
            f"need at least {min_quotients} partial quotients, got {len(quotients)}")
    if j_max < 1:
        raise InvalidArgument("j_max must be positive")
    capped = np.asarray([min(a, j_max + 1) for a in quotients], dtype=np.int64)
    counts = np.bincount(capped, minlength=j_max + 2)
    total = int(capped.size)
    freqs = {j: float(counts[j] / total) for j in range(1, j_max + 1)}
    theo = {j: gauss_kuzmin_mass(j) for j in range(1, j_max + 1)}
    # the Gauss-Kuzmin masses telescope: sum_{j<=J} = log2(2 (J+1)/(J+2))
    theo_overflow = 1 - math.log2(2 * (j_max + 1) / (j_max + 2))
    return GaussKuzminTable(j_max, total, freqs, float(counts[j_max + 1] / total), theo, theo_overflow)


def _pool(source) -> list[int]:
    if isinstance(source, ContinuedFractionExpansion):
        return list(source.partial_quotients)
    out = []
    for item in source:
        if isinstance(item, ContinuedFractionExpansion):
            out.extend(item.partial_quotients)
        elif isinstance(item, Iterable):
            out.extend(int(a) for a in item)
        else:
            out.append(int(item))
    return out


def discrepancy_bound_from_quotients(expansion: ContinuedFractionExpansion, n: int) -> float:
    """Upper bound on n D*_n({k}, ..., {k n}) from the partial quotients of k.

    Ostrowski-type bound 3 (a_1 + ... + a_{m+1}) with q_m <= n < q_{m+1}. For
    a rational k = p/q and n >= q the sequence has period q, so the bound is
    assembled from floor(n/q) full periods plus the remainder.
    """
    if n < 1:
        raise InvalidArgument("n must be positive")
    qs = expansion.denominators
    a = expansion.partial_quotients
    if expansion.terminated and n >= qs[-1]:
        period = qs[-1]
        full, rest = divmod(n, period)
        whole = OSTROWSKI_CONSTANT * max(1, sum(a))
        return full * whole + (discrepancy_bound_from_quotients(expansion, rest) if rest else 0.0)
    m = max(i for i, q in enumerate(qs) if q <= n)
    if m + 1 >= len(qs):
        raise ResourceLimit(
            f"expansion has {len(a)} quotients; the next denominator beyond {qs[-1]} is "
            f"needed to bound n = {n}")
    return float(OSTROWSKI_CONSTANT * sum(a[: m + 1]))


def star_discrepancy_of_multiples(k, n: int) -> float:
    """Exact n D*_n of ({k}, {2k}, ..., {nk})."""
    vals = arithmetic_terms(ArithmeticSpec(k, 1, n))
    return n * star_discrepancy(Sample(np.minimum(vals, 1.0), 0.0, 1.0))


@dataclass
class MetricRateReport:
    epsilon: float
    n_grid: list
    rows: list = field(default_factory=list)  # one dict per k

    @property
    def flagged(self) -> int:
        return sum(r["flagged"] for r in self.rows)

    def as_dict(self) -> dict:
        return {"epsilon": self.epsilon, "n_grid": list(self.n_grid), "rows": self.rows,
                "flagged": self.flagged}


def _normalised_rates(k, grid: Sequence[int], epsilon: float) -> list[float]:
    n_max = grid[-1]
    vals = arithmetic_terms(ArithmeticSpec(k, 1, n_max))
    exact_rational = is_exact(k)
    rates = []
    for n in grid:
        prefix = Sample(np.minimum(vals[:n], 1.0), 0.0, 1.0)
        if exact_rational:
            # a rational step only reaches q lattice points; compare against those
            q = Fraction(k).denominator
            dev, _, _ = sup_deviation(prefix, DiscreteUniform(q, 1.0 / q))
        else:
            dev = n * star_discrepancy(prefix)
        rates.append(dev / (math.log(n) * math.log(math.log(n)) ** (1 + epsilon)))
    return rates


def metric_rate_check(k_samples, epsilon: float, n_grid: Sequence[int]) -> MetricRateReport:
    """Diagnostic: n D*_n / ((log n)(log log n)^(1+eps)) along ``n_grid`` per step k.

    A k is flagged when its normalised rate increases strictly across the
    top half of the grid. Rational steps are measured against the discrete
    uniform law on their q attainable values.
    """
    grid = [int(n) for n in n_grid]
    if any(n < 16 for n in grid):
        raise InvalidArgument("grid points must be at least 16")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidArgument("grid must be strictly increasing")
    if not epsilon > 0:
        raise InvalidArgument("epsilon must be positive")
    report = MetricRateReport(epsilon, grid)
    for k in k_samples:
        rates = _normalised_rates(k, grid, epsilon)
        top = rates[len(rates) // 2:]
        flagged = len(top) >= 2 and all(b > a for a, b in zip(top, top[1:]))
        report.rows.append({"k": str(k), "rates": rates, "max_rate": max(rates),
                            "flagged": flagged})
    return report
