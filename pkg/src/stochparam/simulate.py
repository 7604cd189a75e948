"""Monte Carlo engine: Brownian bridges, the discrete-grid bridge maximum,
the Bernoulli stochasticity parameter, the empirical process and the
central limit probe for lacunary sums.

Replications are generated in fixed-size blocks, block ``b`` drawing from
the stream ``(seed, tag, b)``. Any number of workers therefore produces
bit-identical output.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng as _rng
from .counting import (Bernoulli, ContinuousCdf, ContinuousUniform, DiscreteUniform,
                       PiecewiseLinear, Sample, ks_distance, stochasticity_parameter,
                       sup_deviation)
from .distributions import check_no_rational_power, kolmogorov_cdf
from .errors import InvalidArgument
from .sequences import GeometricRealSpec, geometric_real_terms

BRIDGE_TAG, BERNOULLI_TAG, LACUNARY_TAG = 11, 12, 13
BLOCK = 10_000
START_BLOCK = 250


def run_blocks(func: Callable, args_list: Sequence[tuple], workers: int = 1) -> list:
    """Apply ``func`` to each argument tuple, in order, optionally in parallel."""
    if workers <= 1 or len(args_list) <= 1:
        return [func(*args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, *zip(*args_list)))


def _block_sizes(total: int, block: int) -> list[int]:
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


@dataclass
class EmpiricalCdfEstimate:
    """Sorted replicate values of a statistic."""

    values: np.ndarray
    trials: int
    seed: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.sort(np.asarray(self.values, dtype=float))
        if self.trials < 1 or self.values.size != self.trials:
            raise InvalidArgument("estimate needs one value per trial and at least one trial")

    def cdf(self, x):
        return np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.trials

    def ks_distance(self, cdf: Callable) -> float:
        """sup |empirical CDF - cdf| for a continuous (vectorised) ``cdf``."""
        return ks_distance(self.values, cdf)

    def summary(self) -> dict:
        v = self.values
        return {"trials": self.trials, "seed": self.seed, "mean": float(v.mean()),
                "std": float(v.std()), "min": float(v[0]), "max": float(v[-1]), **self.meta}


def vectorized(cdf: Callable) -> Callable:
    return np.vectorize(cdf, otypes=[float])


KOLMOGOROV = vectorized(kolmogorov_cdf)


# -- Brownian bridge ----------------------------------------------------------


@dataclass(frozen=True)
class BridgePath:
    grid: np.ndarray
    values: np.ndarray
    seed: int


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size < 2 or g[0] != 0.0 or g[-1] != 1.0:
        raise InvalidArgument("bridge grid must start at 0 and end at 1")
    if np.any(np.diff(g) <= 0):
        raise InvalidArgument("bridge grid must be strictly increasing")
    return g


def bridge_paths(grid, count: int, gen: np.random.Generator) -> np.ndarray:
    """``count`` bridge paths on ``grid`` as rows, B(t) = W(t) - t W(1)."""
    g = _check_grid(grid)
    steps = gen.standard_normal((count, g.size - 1)) * np.sqrt(np.diff(g))
    W = np.concatenate([np.zeros((count, 1)), np.cumsum(steps, axis=1)], axis=1)
    B = W - g * W[:, -1:]
    B[:, 0] = 0.0
    B[:, -1] = 0.0
    return B


def sample_bridge(grid, seed: int) -> BridgePath:
    g = _check_grid(grid)
    values = bridge_paths(g, 1, _rng.make_rng(seed, BRIDGE_TAG))[0]
    return BridgePath(g, values, seed)


def _bridge_max_block(N: int, size: int, seed: int, block: int) -> np.ndarray:
    gen = _rng.make_rng(seed, BRIDGE_TAG, N, block)
    steps = gen.standard_normal((size, N)) * math.sqrt(1.0 / N)
    W = np.cumsum(steps, axis=1)
    t = np.arange(1, N + 1) / N
    B = W[:, :-1] - t[:-1] * W[:, -1:]
    return np.abs(B).max(axis=1)


def discrete_bridge_max(N: int, trials: int, seed: int, workers: int = 1) -> EmpiricalCdfEstimate:
    """Law of max_{m=1..N-1} |B(m/N)|, each path simulated once on the full grid."""
    if int(N) != N or N < 2:
        raise InvalidArgument(f"N must be an integer >= 2, got {N}")
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    sizes = _block_sizes(trials, BLOCK)
    parts = run_blocks(_bridge_max_block, [(N, s, seed, b) for b, s in enumerate(sizes)], workers)
    return EmpiricalCdfEstimate(np.concatenate(parts), trials, seed,
                                {"statistic": "discrete-bridge-max", "N": int(N), **_rng.metadata(seed)})


def siegmund_shift(N: int) -> float:
    """Expected undershoot of the grid maximum, zeta(1/2)/sqrt(2 pi) / sqrt(N)."""
    return 0.5825971579390107 / math.sqrt(N)


def bridge_max_deviation(Ns: Sequence[int], trials: int, seed: int, workers: int = 1) -> list[dict]:
    """KS distance of the N-point bridge maximum to Phi, raw and shift-corrected, per N.

    No bound is claimed; this measures how fast the discrete law approaches
    the Kolmogorov law.
    """
    rows = []
    for N in Ns:
        est = discrete_bridge_max(N, trials, seed, workers)
        rows.append({"N": int(N), "trials": trials, "ks": est.ks_distance(KOLMOGOROV),
                     "ks_shifted": ks_distance(est.values + siegmund_shift(N), KOLMOGOROV),
                     "shift": siegmund_shift(N)})
    return rows


# -- Bernoulli example --------------------------------------------------------------


def _random_words(gen: np.random.Generator, shape) -> np.ndarray:
    return gen.bit_generator.random_raw(shape).astype(np.uint64)


def _bit_words(n: int, size: int, seed: int, block: int, word_source) -> np.ndarray:
    gen = _rng.make_rng(seed, BERNOULLI_TAG, n, block)
    nwords = -(-n // 64)
    words = np.asarray(word_source(gen, (size, nwords)), dtype=np.uint64)
    spare = 64 * nwords - n
    if spare:
        words[:, -1] &= np.uint64((1 << (64 - spare)) - 1)
    return words


def _bernoulli_block(n: int, size: int, seed: int, block: int, word_source=_random_words):
    words = _bit_words(n, size, seed, block, word_source)
    ones = np.bitwise_count(words).sum(axis=1, dtype=np.int64)
    return np.abs(ones - n / 2) / math.sqrt(n)


def bernoulli_bits(n: int, seed: int, replication: int, word_source=_random_words) -> np.ndarray:
    """The n fair bits drawn for one replication of :func:`bernoulli_lambda`."""
    block, offset = divmod(replication, BLOCK)
    words = _bit_words(n, BLOCK, seed, block, word_source)[offset]
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    return bits[:n].astype(float)


def bernoulli_lambda(n: int, trials: int, seed: int, workers: int = 1,
                     word_source=_random_words, cross_check: int = 8) -> EmpiricalCdfEstimate:
    """Law of |sum z_m - n/2| / sqrt(n) for n fair bits z_m.

    ``word_source(gen, shape)`` supplies the raw 64-bit words the bits are
    read from; the default draws them from the seeded stream. The first
    ``cross_check`` replications are recomputed as the stochasticity
    parameter of the unpacked bits against Bernoulli(1/2).
    """
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n}")
    if trials < 1:
        raise InvalidArgument("trials must be positive")
    sizes = _block_sizes(trials, BLOCK)
    args = [(n, s, seed, b, word_source) for b, s in enumerate(sizes)]
    if word_source is not _random_words:
        workers = 1
    parts = run_blocks(_bernoulli_block, args, workers)
    for rep in range(min(cross_check, trials)):
        bits = bernoulli_bits(n, seed, rep, word_source)
        lam = stochasticity_parameter(Sample(bits, 0.0, 1.0), Bernoulli(0.5)).lam
        if abs(lam - parts[0][rep]) > 1e-12:
            raise AssertionError(f"replication {rep}: popcount {parts[0][rep]} != counting {lam}")
    return EmpiricalCdfEstimate(np.concatenate(parts), trials, seed,
                                {"statistic": "bernoulli-lambda", "n": int(n), **_rng.metadata(seed)})


# -- empirical process -----------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalProcessPath:
    """G_n(X) = (C_n(X) - n F(X)) / sqrt(n) as knots with one-sided values.

    Between knots G_n is constant for step laws and affine in F for
    continuous ones.
    """

    knots: np.ndarray
    left: np.ndarray  # G_n(knot-)
    right: np.ndarray  # G_n(knot)
    sample: Sample
    cdf: object

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        cn = np.searchsorted(self.sample.values, X, side="right")
        return (cn - self.sample.n * self.cdf.cdf(X)) / math.sqrt(self.sample.n)

    def sup(self) -> float:
        return float(max(np.abs(self.left).max(), np.abs(self.right).max()))


def empirical_process(sample: Sample, cdf) -> EmpiricalProcessPath:
    sup_deviation(sample, cdf)  # support checks
    n = sample.n
    root = math.sqrt(n)
    vals = sample.values
    if isinstance(cdf, (ContinuousUniform, ContinuousCdf)):
        knots = np.unique(vals)
        right_mass = left_mass = cdf.cdf(knots)
    else:
        points, masses = cdf.jumps()
        if isinstance(cdf, DiscreteUniform):
            vals = points[cdf.lattice_index(vals)]
        knots = np.union1d(vals, points)
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        cum[-1] = 1.0
        right_mass = cum[np.searchsorted(points, knots, side="right")]
        left_mass = cum[np.searchsorted(points, knots, side="left")]
    right = (np.searchsorted(vals, knots, side="right") - n * right_mass) / root
    left = (np.searchsorted(vals, knots, side="left") - n * left_mass) / root
    return EmpiricalProcessPath(knots, left, right, sample, cdf)


# -- covariance identity -------------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceSpec:
    coefficients: tuple
    thresholds: tuple

    def __post_init__(self):
        b = tuple(float(v) for v in self.coefficients)
        t = tuple(float(v) for v in self.thresholds)
        if len(b) < 1 or len(b) != len(t):
            raise InvalidArgument("need matching non-empty coefficient and threshold lists")
        if t[0] < 0 or t[-1] > 1 or any(y <= x for x, y in zip(t, t[1:])):
            raise InvalidArgument("thresholds must increase strictly within [0, 1]")
        object.__setattr__(self, "coefficients", b)
        object.__setattr__(self, "thresholds", t)


def covariance_identity(spec: CovarianceSpec) -> tuple[float, float, float]:
    """Variance of sum_k b_k (1[0,t_k] - t_k) three ways.

    Returns (integral_form, closed_form, bridge_form): the integral of the
    squared piecewise-constant function, the closed-form double sum, and
    E(sum b_k B(t_k))^2 from the bridge covariance min(s,t) - s t.
    """
    b, t = spec.coefficients, spec.thresholds
    m = len(b)
    centre = math.fsum(bk * tk for bk, tk in zip(b, t))
    # on (t_{j-1}, t_j] only indicators with k >= j are active
    edges = (0.0, *t, 1.0)
    pieces = []
    for j in range(m + 1):
        height = math.fsum(b[j:]) - centre
        pieces.append((edges[j + 1] - edges[j]) * height * height)
    integral = math.fsum(pieces)

    closed = math.fsum([b[k] ** 2 * t[k] * (1 - t[k]) for k in range(m)]
                       + [2 * b[i] * b[j] * t[i] * (1 - t[j]) for i in range(m) for j in range(i + 1, m)])

    bridge = math.fsum(b[i] * b[j] * (min(t[i], t[j]) - t[i] * t[j]) for i in range(m) for j in range(m))
    return integral, closed, bridge


# -- lacunary sums ----------------------------------------------------------------------------


def lacunary_block(a, N, n: int, starts: np.ndarray, output_bits: int = 64) -> np.ndarray:
    """Rows of {a^x A mod N}, x = 1..n, one row per start A, as doubles."""
    out = np.empty((len(starts), n))
    for i, A in enumerate(starts):
        spec = GeometricRealSpec(a, float(A), N, n, output_bits)
        out[i] = [float(v) for v in geometric_real_terms(spec)]
    return np.minimum(out, float(N))


def draw_starts(N, count: int, seed: int, block: int) -> np.ndarray:
    """Uniform starts in (0, N) for block ``block``; zero draws are redrawn."""
    gen = _rng.make_rng(seed, LACUNARY_TAG, block)
    starts = gen.random(count)
    while np.any(starts == 0):
        starts[starts == 0] = gen.random(int(np.sum(starts == 0)))
    return starts * float(N)


def _clt_block(f: PiecewiseLinear, a, n: int, size: int, seed: int, block: int) -> np.ndarray:
    terms = lacunary_block(a, 1, n, draw_starts(1, size, seed, block))
    return f(terms).sum(axis=1) / math.sqrt(n)


def certify_moments(f: PiecewiseLinear) -> None:
    mean, square = f.integral(), f.integral_of_square()
    if abs(mean) > 1e-12:
        raise InvalidArgument(f"test function must have mean 0, got {mean}")
    if abs(square - 1) > 1e-9:
        raise InvalidArgument(f"test function must have unit mean square, got {square}")


def cosine_test_function(pieces: int = 512) -> PiecewiseLinear:
    """Piecewise-linear sqrt(2) cos(2 pi y), renormalised to exact moments."""
    f = PiecewiseLinear.sample_function(lambda y: math.sqrt(2) * math.cos(2 * math.pi * y),
                                        pieces, periodic=True)
    return f.normalized()


def fukuyama_clt_probe(f: PiecewiseLinear, a, n: int, num_A: int, seed: int,
                       workers: int = 1) -> EmpiricalCdfEstimate:
    """Law over uniform A of n^(-1/2) sum_{x<=n} f({a^x A}).

    ``f`` must be a periodic piecewise-linear function with mean 0 and unit
    mean square; ``a`` must be a base none of whose integer powers is rational.
    """
    certify_moments(f)
    check_no_rational_power(a)
    if n < 1 or num_A < 1:
        raise InvalidArgument("n and num_A must be positive")
    if not f.periodic:
        f = PiecewiseLinear(f.knots, f.values, periodic=True)
    sizes = _block_sizes(num_A, START_BLOCK)
    parts = run_blocks(_clt_block, [(f, a, n, s, seed, b) for b, s in enumerate(sizes)], workers)
    return EmpiricalCdfEstimate(np.concatenate(parts), num_A, seed,
                                {"statistic": "lacunary-clt", "a": str(a), "n": n,
                                 **_rng.metadata(seed)})
