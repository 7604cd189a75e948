"""Empirical counting functions and the stochasticity parameter.

For a sample x_1 <= ... <= x_n and a hypothesised distribution function F,
the stochasticity parameter is

    lambda_n = sup_X |C_n(X) - n F(X)| / sqrt(n),

with C_n(X) = #{m : x_m <= X}. Everything here is computed exactly from
the jump points of C_n and F; no grids are involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distributions import kolmogorov_cdf
from .errors import InvalidArgument

RIGHT = "right-value"
LEFT = "left-limit"

# relative tolerance used to snap sample values onto lattice support points
_SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Sample:
    """A finite multiset of reals together with its ambient interval [lo, hi].

    ``values`` is stored sorted ascending as a read-only float array.
    """

    values: np.ndarray
    lo: float = 0.0
    hi: float = 1.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.sort(np.asarray(self.values, dtype=float).ravel())
        if vals.size == 0:
            raise InvalidArgument("a sample needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise InvalidArgument("sample values must be finite")
        lo, hi = float(self.lo), float(self.hi)
        if not lo < hi:
            raise InvalidArgument(f"sample domain needs lo < hi, got [{lo}, {hi}]")
        if vals[0] < lo or vals[-1] > hi:
            raise InvalidArgument(
                f"sample values must lie in [{lo}, {hi}]; got range [{vals[0]}, {vals[-1]}]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def scaled(self) -> "Sample":
        """The same sample mapped affinely onto [0, 1]."""
        width = self.hi - self.lo
        return Sample(np.clip((self.values - self.lo) / width, 0.0, 1.0), 0.0, 1.0, dict(self.meta))


# -- theoretical distribution functions -------------------------------------


@dataclass(frozen=True)
class ContinuousUniform:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not float(self.lo) < float(self.hi):
            raise InvalidArgument(f"uniform law needs lo < hi, got [{self.lo}, {self.hi}]")

    def cdf(self, x):
        return np.clip((np.asarray(x, dtype=float) - self.lo) / (self.hi - self.lo), 0.0, 1.0)


@dataclass(frozen=True)
class ContinuousCdf:
    """An arbitrary continuous distribution function given as a callable."""

    func: Callable[[float], float]
    name: str = "continuous"

    def cdf(self, x):
        return np.vectorize(self.func, otypes=[float])(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class DiscreteUniform:
    """Uniform law on the lattice {offset + j * spacing : j = 0, ..., N-1}."""

    N: int
    spacing: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidArgument(f"discrete uniform needs a positive integer N, got {self.N}")
        if not self.spacing > 0:
            raise InvalidArgument("lattice spacing must be positive")

    def jumps(self):
        points = self.offset + self.spacing * np.arange(self.N)
        return points, np.full(self.N, 1.0 / self.N)

    def cdf(self, x):
        idx = np.floor((np.asarray(x, dtype=float) - self.offset) / self.spacing + _SNAP_TOL)
        return np.clip(idx + 1, 0, self.N) / self.N

    def lattice_index(self, values: np.ndarray) -> np.ndarray:
        """Support index of each value; raises if a value is off the lattice."""
        pos = (np.asarray(values, dtype=float) - self.offset) / self.spacing
        idx = np.rint(pos)
        bad = (np.abs(pos - idx) > _SNAP_TOL * np.maximum(1.0, np.abs(pos))) | (idx < 0) | (idx >= self.N)
        if np.any(bad):
            raise InvalidArgument(
                f"sample value {np.asarray(values)[bad][0]} is not a support point of "
                f"the discrete uniform law on {self.N} points")
        return idx.astype(np.int64)


@dataclass(frozen=True)
class Bernoulli:
    p: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidArgument(f"Bernoulli parameter must lie in [0, 1], got {self.p}")

    def jumps(self):
        return np.array([0.0, 1.0]), np.array([1.0 - self.p, self.p])

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, np.where(x < 1, 1.0 - self.p, 1.0))


@dataclass(frozen=True)
class StepFunction:
    """Distribution with finitely many atoms ``points[j]`` of mass ``masses[j]``."""

    points: tuple
    masses: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        mss = np.asarray(self.masses, dtype=float)
        if pts.ndim != 1 or pts.shape != mss.shape or pts.size == 0:
            raise InvalidArgument("step function needs matching non-empty point and mass lists")
        if np.any(np.diff(pts) <= 0):
            raise InvalidArgument("step function jump points must be strictly increasing")
        if np.any(mss <= 0):
            raise InvalidArgument("step function masses must be positive")
        if abs(math.fsum(mss) - 1.0) > 1e-12:
            raise InvalidArgument(f"step function masses sum to {math.fsum(mss)}, not 1")
        object.__setattr__(self, "points", tuple(pts.tolist()))
        object.__setattr__(self, "masses", tuple(mss.tolist()))

    def jumps(self):
        return np.asarray(self.points), np.asarray(self.masses)

    def cdf(self, x):
        pts, mss = self.jumps()
        cum = np.concatenate([[0.0], np.cumsum(mss)])
        cum[-1] = 1.0
        return cum[np.searchsorted(pts, np.asarray(x, dtype=float), side="right")]


TheoreticalCdf = ContinuousUniform | ContinuousCdf | DiscreteUniform | Bernoulli | StepFunction


def parse_cdf(text: str) -> TheoreticalCdf:
    """Parse ``uniform:LO:HI``, ``discrete:N[:SPACING[:OFFSET]]`` or ``bernoulli:P``."""
    kind, *args = text.strip().split(":")
    try:
        nums = [float(a) for a in args]
        if kind == "uniform":
            return ContinuousUniform(*(nums or [0.0, 1.0]))
        if kind == "discrete":
            if not nums:
                raise InvalidArgument("discrete law needs N, e.g. discrete:100")
            return DiscreteUniform(int(nums[0]), *nums[1:])
        if kind == "bernoulli":
            return Bernoulli(*nums)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"bad distribution spec {text!r}: {exc}") from exc
    raise InvalidArgument(f"unknown distribution {kind!r}; use uniform, discrete or bernoulli")


# -- counting functions -------------------------------------------------------


def empirical_count(sample: Sample, X: float) -> int:
    """C_n(X), the number of sample values not exceeding X."""
    return int(np.searchsorted(sample.values, X, side="right"))


@dataclass(frozen=True)
class StochasticityReport:
    n: int
    f_n: float
    lam: float
    argsup: float
    side: str
    phi_of_lambda: float

    def as_dict(self) -> dict:
        return {"n": self.n, "f_n": self.f_n, "lambda": self.lam, "argsup": self.argsup,
                "side": self.side, "phi_of_lambda": self.phi_of_lambda}


def _continuous_deviations(probs: np.ndarray):
    """Right-value and left-limit deviations C_n - nF at each sorted point.

    ``probs`` holds F(x_(i)) for the sorted sample. Returns arrays of
    (i - n u_i) and (n u_i - (i - 1)); ties take care of themselves since the
    maximum picks the last index of a tie group for the first array and the
    first index for the second.
    """
    n = probs.size
    i = np.arange(1, n + 1, dtype=float)
    return i - n * probs, n * probs - (i - 1)


def _pick(candidates):
    """Max deviation, breaking ties by smallest X and then right-value first."""
    best = max(c[0] for c in candidates)
    ties = [c for c in candidates if c[0] == best]
    ties.sort(key=lambda c: (c[1], 0 if c[2] == RIGHT else 1))
    return ties[0]


def _sup_continuous(sample: Sample, probs: np.ndarray):
    right, left = _continuous_deviations(probs)
    ir, il = int(np.argmax(right)), int(np.argmax(left))
    candidates = [(float(right[ir]), float(sample.values[ir]), RIGHT),
                  (float(left[il]), float(sample.values[il]), LEFT)]
    # first occurrence in a tie group has the smallest X already
    dev, x, side = _pick(candidates)
    if dev <= 0:
        return 0.0, float(sample.values[0]), RIGHT
    return dev, x, side


def _sup_lattice(sample: Sample, cdf: DiscreteUniform):
    idx = cdf.lattice_index(sample.values)
    n, N = sample.n, cdf.N
    counts = np.cumsum(np.bincount(idx, minlength=N))
    # N * (C_n - C_0) in exact integer arithmetic
    scaled = N * counts - n * np.arange(1, N + 1)
    j = int(np.argmax(np.abs(scaled)))
    return abs(int(scaled[j])) / N, float(cdf.offset + j * cdf.spacing), RIGHT


def _sup_step(sample: Sample, points: np.ndarray, masses: np.ndarray):
    n = sample.n
    grid = np.union1d(sample.values, points)
    cn = np.searchsorted(sample.values, grid, side="right")
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    cum[-1] = 1.0
    c0 = n * cum[np.searchsorted(points, grid, side="right")]
    dev = np.abs(cn - c0)
    j = int(np.argmax(dev))
    # the left limit at a grid point equals the right value at its predecessor,
    # so right values at the merged jump set cover every candidate
    return float(dev[j]), float(grid[j]), RIGHT


def _check_support(sample: Sample, cdf) -> None:
    if isinstance(cdf, ContinuousUniform):
        if sample.values[0] < cdf.lo or sample.values[-1] > cdf.hi:
            raise InvalidArgument(
                f"sample range [{sample.values[0]}, {sample.values[-1]}] is outside the "
                f"uniform law's support [{cdf.lo}, {cdf.hi}]")
    elif isinstance(cdf, Bernoulli):
        if not np.all((sample.values == 0) | (sample.values == 1)):
            raise InvalidArgument("Bernoulli law needs a 0/1 sample")


def sup_deviation(sample: Sample, cdf: TheoreticalCdf):
    """(F_n, argsup, side) for sup_X |C_n(X) - n F(X)|."""
    _check_support(sample, cdf)
    if isinstance(cdf, ContinuousUniform):
        probs = np.clip((sample.values - cdf.lo) / (cdf.hi - cdf.lo), 0.0, 1.0)
        return _sup_continuous(sample, probs)
    if isinstance(cdf, ContinuousCdf):
        return _sup_continuous(sample, cdf.cdf(sample.values))
    if isinstance(cdf, DiscreteUniform):
        return _sup_lattice(sample, cdf)
    if isinstance(cdf, (Bernoulli, StepFunction)):
        return _sup_step(sample, *cdf.jumps())
    raise InvalidArgument(f"unsupported distribution {cdf!r}")


def stochasticity_parameter(sample: Sample, cdf: TheoreticalCdf | None = None) -> StochasticityReport:
    """Kolmogorov's stochasticity parameter of ``sample`` against ``cdf``.

    Defaults to the continuous uniform law on the sample's ambient interval.
    """
    if cdf is None:
        cdf = ContinuousUniform(sample.lo, sample.hi)
    f_n, x, side = sup_deviation(sample, cdf)
    lam = f_n / math.sqrt(sample.n)
    return StochasticityReport(sample.n, f_n, lam, x, side, kolmogorov_cdf(lam))


def stochasticity_lambda(values: Sequence[float], lo: float = 0.0, hi: float = 1.0) -> float:
    """Shortcut: lambda_n of raw values against the uniform law on [lo, hi]."""
    return stochasticity_parameter(Sample(values, lo, hi)).lam


def ks_distance(sorted_values: np.ndarray, cdf: Callable) -> float:
    """sup |F_emp - F| for a continuous F (vectorised ``cdf``)."""
    vals = np.sort(np.asarray(sorted_values, dtype=float))
    right, left = _continuous_deviations(np.asarray(cdf(vals), dtype=float))
    return max(0.0, float(right.max()), float(left.max())) / vals.size


# -- discrepancy ----------------------------------------------------------------


def star_discrepancy(sample: Sample) -> float:
    """D*_n = max_i max(i/n - x_(i), x_(i) - (i-1)/n) for points in [0, 1]."""
    x = sample.values
    if x[0] < 0 or x[-1] > 1:
        raise InvalidArgument("star discrepancy needs values in [0, 1]")
    n = x.size
    i = np.arange(1, n + 1, dtype=float)
    return float(max((i / n - x).max(), (x - (i - 1) / n).max()))


def weyl_sum(sample: Sample, h: int) -> float:
    """|(1/n) sum_m exp(2 pi i h x_m)|."""
    if int(h) != h or h == 0:
        raise InvalidArgument(f"Weyl frequency must be a nonzero integer, got {h}")
    phases = 2.0 * np.pi * ((int(h) * sample.values) % 1.0)
    return float(abs(np.exp(1j * phases).mean()))


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function on [0, 1] through the given knots.

    Integrals are computed in closed form, so the moments of the function are
    exact up to floating-point rounding. With ``periodic=True`` arguments are
    reduced modulo 1 before evaluation.
    """

    knots: tuple
    values: tuple
    periodic: bool = False

    def __post_init__(self):
        ys = np.asarray(self.knots, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        if ys.size < 2 or ys.shape != vs.shape:
            raise InvalidArgument("piecewise-linear function needs >= 2 matching knots and values")
        if ys[0] != 0.0 or ys[-1] != 1.0 or np.any(np.diff(ys) <= 0):
            raise InvalidArgument("knots must increase strictly from 0 to 1")
        object.__setattr__(self, "knots", tuple(ys.tolist()))
        object.__setattr__(self, "values", tuple(vs.tolist()))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.periodic:
            y = y % 1.0
        return np.interp(y, self.knots, self.values)

    def integral(self) -> float:
        ys, vs = np.asarray(self.knots), np.asarray(self.values)
        return math.fsum(np.diff(ys) * (vs[:-1] + vs[1:]) / 2)

    def integral_of_square(self) -> float:
        ys, vs = np.asarray(self.knots), np.asarray(self.values)
        a, b = vs[:-1], vs[1:]
        return math.fsum(np.diff(ys) * (a * a + a * b + b * b) / 3)

    def total_variation(self) -> float:
        var = math.fsum(np.abs(np.diff(self.values)))
        if self.periodic:
            var += abs(self.values[-1] - self.values[0])
        return var

    def normalized(self) -> "PiecewiseLinear":
        """Shift to mean zero and rescale to unit mean square."""
        centred = np.asarray(self.values) - self.integral()
        shifted = PiecewiseLinear(self.knots, tuple(centred), self.periodic)
        scale = math.sqrt(shifted.integral_of_square())
        if scale == 0:
            raise InvalidArgument("cannot normalise a constant function")
        return PiecewiseLinear(self.knots, tuple(centred / scale), self.periodic)

    @classmethod
    def sample_function(cls, func: Callable, pieces: int, periodic: bool = False) -> "PiecewiseLinear":
        ys = np.linspace(0.0, 1.0, pieces + 1)
        return cls(tuple(ys), tuple(float(func(y)) for y in ys), periodic)


def koksma_gap(sample: Sample, f: PiecewiseLinear, total_variation: float):
    """Integration error of ``f`` on ``sample`` and Koksma's bound for it.

    Returns ``(gap, bound)`` with gap = |mean f(x_m) - int f| and
    bound = V(f) * D*_n.
    """
    actual = f.total_variation()
    if abs(actual - total_variation) > 1e-9 * max(1.0, actual):
        raise InvalidArgument(
            f"declared total variation {total_variation} does not match the function's {actual}")
    gap = abs(math.fsum(f(sample.values)) / sample.n - f.integral())
    bound = total_variation * star_discrepancy(sample)
    return gap, bound
