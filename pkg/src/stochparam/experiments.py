"""Seeded, persisted experiments.

Each experiment takes plain parameters, returns an :class:`ExperimentResult`
echoing them, and can be saved as a JSON summary plus a CSV of
per-replication rows. Pass/fail thresholds live in ``data/thresholds.json``
(or a user file with the same layout), never in code.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import rng as _rng
from .counting import (ContinuousUniform, DiscreteUniform, Sample, stochasticity_parameter,
                       sup_deviation)
from .distributions import classify_base, check_no_rational_power, kolmogorov_cdf, lil_constant
from .errors import InvalidArgument
from .precision import NamedConstant, is_exact, parse_real
from .sequences import (ArithmeticSpec, GeometricIntSpec, GeometricRealSpec, arithmetic_terms,
                        geometric_int_terms, geometric_real_terms, lacunary_digit_terms)
from .simulate import (KOLMOGOROV, START_BLOCK, _block_sizes, draw_starts, lacunary_block,
                       run_blocks)

SCHEMA_VERSION = 1
BOUNDED_QUOTIENTS = {"phi", "sqrt2", "sqrt3"}  # quadratic irrationals


def load_thresholds(path: str | Path | None = None) -> dict:
    """Packaged thresholds, overlaid section by section with ``path`` if given."""
    text = resources.files("stochparam").joinpath("data/thresholds.json").read_text()
    table = json.loads(text)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise InvalidArgument(f"threshold file not found: {path}") from exc
        for key, section in user.items():
            if isinstance(section, dict):
                table.setdefault(key, {}).update(section)
    return table


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    output: str | None = None

    def __post_init__(self):
        if "seed" not in self.params:
            raise InvalidArgument("every experiment config needs a seed")


@dataclass
class ExperimentResult:
    config: dict
    replications: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    version: str = __version__
    wall_time: float = 0.0
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self):
        return self.summary.get("passed")

    def statistics(self) -> dict:
        """Everything that must replay bit-identically (i.e. not the timing)."""
        return {"config": self.config, "replications": self.replications, "summary": self.summary}

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, with_replications: bool = True) -> str:
        data = self.to_dict()
        if not with_replications:
            data.pop("replications")
        return json.dumps(_jsonable(data), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentResult":
        return cls(**{k: data[k] for k in ("config", "replications", "summary", "version",
                                           "wall_time", "schema_version") if k in data})

    def save(self, prefix: str | Path) -> tuple[Path, Path]:
        """Write ``<prefix>.json`` (full record) and ``<prefix>.csv`` (rows)."""
        prefix = Path(prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        json_path, csv_path = prefix.with_suffix(".json"), prefix.with_suffix(".csv")
        json_path.write_text(self.to_json() + "\n")
        rows = _jsonable(self.replications)
        with csv_path.open("w", newline="") as fh:
            fh.write(f"# {self.config.get('experiment')} seed={self.config.get('seed')} "
                     f"version={self.version} schema={self.schema_version}\n")
            if rows:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
        return json_path, csv_path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (Fraction, NamedConstant)):
        return str(obj.name if isinstance(obj, NamedConstant) else obj)
    return obj


def _result(config: dict, rows: list, summary: dict, started: float) -> ExperimentResult:
    return ExperimentResult(_jsonable(config), _jsonable(rows), _jsonable(summary),
                            wall_time=time.perf_counter() - started)


def _real(value):
    return parse_real(value) if isinstance(value, str) else value


# -- the two fifteen-term sequences ----------------------------------------------------


def arnold_sequences() -> dict:
    return {
        "geometric": geometric_int_terms(GeometricIntSpec(3, 1, 100, 15)),
        "arithmetic": [int(v) for v in arithmetic_terms(ArithmeticSpec(37, 100, 15))],
    }


def arnold_comparison(thresholds: dict | None = None) -> ExperimentResult:
    """lambda_15 of 3^x mod 100 and 37 x mod 100 under both conventions."""
    started = time.perf_counter()
    limits = (thresholds or load_thresholds())["arnold"]
    rows, summary = [], {}
    for name, terms in arnold_sequences().items():
        sample = Sample(terms, 0, 100)
        cont = stochasticity_parameter(sample, ContinuousUniform(0, 100))
        disc = stochasticity_parameter(sample, DiscreteUniform(100))
        rows.append({"sequence": name, "terms": " ".join(f"{t:02d}" for t in terms),
                     "lambda_continuous": cont.lam, "phi_continuous": cont.phi_of_lambda,
                     "lambda_discrete": disc.lam, "phi_discrete": disc.phi_of_lambda})
        target = limits[f"{name}_target"]
        summary[f"{name}_lambda"] = cont.lam
        summary[f"{name}_phi"] = cont.phi_of_lambda
        summary[f"{name}_within_tolerance"] = abs(cont.lam - target) <= limits["tolerance"]
    summary["passed"] = summary["geometric_within_tolerance"] and summary["arithmetic_within_tolerance"]
    summary["thresholds"] = limits
    return _result({"experiment": "arnold", "seed": 0}, rows, summary, started)


# -- lambda_n(A) against the Kolmogorov law -------------------------------------------------


def _theorem1_block(a, N, n: int, size: int, seed: int, block: int):
    starts = draw_starts(N, size, seed, block)
    terms = lacunary_block(a, N, n, starts)
    lams = [stochasticity_parameter(Sample(row, 0.0, float(N))).lam for row in terms]
    return starts, np.asarray(lams)


def theorem1_lambdas(a, N, n: int, num_A: int, seed: int, workers: int = 1):
    """(starts, lambdas) for ``num_A`` uniform starts A in (0, N)."""
    a, N = _real(a), _real(N)
    check_no_rational_power(a)
    sizes = _block_sizes(num_A, START_BLOCK)
    parts = run_blocks(_theorem1_block, [(a, N, n, s, seed, b) for b, s in enumerate(sizes)], workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def ks_to_kolmogorov(values) -> float:
    from .counting import ks_distance
    return ks_distance(np.asarray(values), KOLMOGOROV)


def theorem1_experiment(a="e", N=1, n: int = 256, num_A: int = 2000, seed: int = 11,
                        workers: int = 1, thresholds: dict | None = None) -> ExperimentResult:
    """Empirical law of lambda_n({a^x A mod N}) over uniform A versus Phi."""
    started = time.perf_counter()
    limit = (thresholds or load_thresholds())["theorem1"]["ks_max"]
    config = {"experiment": "theorem1", "a": str(a), "N": str(N), "n": n, "num_A": num_A,
              "seed": seed, **_rng.metadata(seed)}
    starts, lams = theorem1_lambdas(a, N, n, num_A, seed, workers)
    ks = ks_to_kolmogorov(lams)
    diagnostic = num_A < 2
    rows = [{"A": float(A), "lambda": float(lam)} for A, lam in zip(starts, lams)]
    summary = {"ks_distance": ks, "threshold": limit, "diagnostic_only": diagnostic,
               "passed": None if diagnostic else ks < limit,
               "mean_lambda": float(np.mean(lams)),
               "working_bits": GeometricRealSpec(_real(a), 1, 1, n).working_bits()}
    return _result(config, rows, summary, started)


def theorem1_convergence(a="e", N=1, ns=(64, 256), num_A: int = 2000, seeds=range(5),
                         workers: int = 1) -> dict:
    """Median over seeds of the KS distance to Phi for each n."""
    table = {}
    for n in ns:
        distances = [ks_to_kolmogorov(theorem1_lambdas(a, N, n, num_A, s, workers)[1]) for s in seeds]
        table[int(n)] = {"distances": distances, "median": statistics.median(distances)}
    return table


# -- iterated-logarithm trajectories -------------------------------------------------------


def _lil_source(source: str, n_max: int, seed: int, a=None, A=None, value: float = 0.5):
    """Ordered terms on [0, 1] (plus the limsup constant) for a LIL run."""
    if source == "iid":
        return _rng.make_rng(seed).random(n_max), 1 / math.sqrt(2)
    if source == "constant":
        return np.full(n_max, float(value)), 1 / math.sqrt(2)
    if source == "geometric":
        if a is None:
            raise InvalidArgument("geometric source needs a base a")
        a = _real(a)
        const = lil_constant(a, classify_base(a))
        integer = (is_exact(a) and Fraction(a).denominator == 1)
        if integer and A is None:
            terms, _ = lacunary_digit_terms(int(a), n_max, _rng.make_rng(seed))
            return terms, const
        if A is None:
            A = float(draw_starts(1, 1, seed, 0)[0])
        spec = GeometricRealSpec(a, _real(A), 1, n_max)
        return np.array([float(t) for t in geometric_real_terms(spec)]), const
    raise InvalidArgument(f"unknown LIL source {source!r}; use iid, geometric or constant")


def lil_tracker(source: str = "iid", checkpoints=(10**3, 10**4, 10**5, 10**6), seed: int = 0,
                a=None, A=None, value: float = 0.5,
                thresholds: dict | None = None) -> ExperimentResult:
    """lambda_n / sqrt(log log n) along checkpoints, against the limsup constant.

    Reports only: a limsup cannot be decided at finite n, so the summary has
    no pass/fail entry. Running maxima beyond ``anomaly_factor`` times the
    constant are flagged.
    """
    started = time.perf_counter()
    factor = (thresholds or load_thresholds())["lil"]["anomaly_factor"]
    checkpoints = [int(c) for c in checkpoints]
    if not checkpoints or min(checkpoints) < 16:
        raise InvalidArgument("checkpoints must be at least 16 so that log log n > 0")
    if any(b <= a_ for a_, b in zip(checkpoints, checkpoints[1:])):
        raise InvalidArgument("checkpoints must be strictly increasing")
    terms, const = _lil_source(source, checkpoints[-1], seed, a, A, value)
    rows, running = [], 0.0
    for n in checkpoints:
        lam = stochasticity_parameter(Sample(np.minimum(terms[:n], 1.0), 0.0, 1.0)).lam
        ratio = lam / math.sqrt(math.log(math.log(n)))
        running = max(running, ratio)
        rows.append({"n": n, "lambda": lam, "ratio": ratio, "running_max": running})
    config = {"experiment": "lil", "source": source, "checkpoints": checkpoints, "seed": seed,
              "a": None if a is None else str(a), "A": None if A is None else str(A),
              **_rng.metadata(seed)}
    summary = {"constant": const, "anomaly_factor": factor, "final_running_max": running,
               "anomalous": running > factor * const}
    return _result(config, rows, summary, started)


# -- arithmetic progressions -------------------------------------------------------------


def arithmetic_decay(k, checkpoints=None, epsilon: float = 0.1,
                     thresholds: dict | None = None) -> ExperimentResult:
    """lambda_n of {k x} along checkpoints.

    Rational k = p/q is tested against the uniform law on its q attainable
    values and must stay inside the q / sqrt(n) envelope; irrational k is
    tested against the continuous uniform law, with the metric-rate
    normalisation n D*_n / ((log n)(log log n)^(1+eps)) reported alongside.
    """
    started = time.perf_counter()
    limits = (thresholds or load_thresholds())["decay"]
    k = _real(k)
    rational = is_exact(k)
    if checkpoints is None:
        q = Fraction(k).denominator if rational else 1
        checkpoints = [q * 2**j for j in range(11)] if rational else [10**j for j in range(2, 7)]
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a_ for a_, b in zip(checkpoints, checkpoints[1:])):
        raise InvalidArgument("checkpoints must be strictly increasing")
    terms = np.minimum(arithmetic_terms(ArithmeticSpec(k, 1, checkpoints[-1])), 1.0)
    rows = []
    for n in checkpoints:
        sample = Sample(terms[:n], 0.0, 1.0)
        if rational:
            q = Fraction(k).denominator
            dev, _, _ = sup_deviation(sample, DiscreteUniform(q, 1.0 / q))
            lam = dev / math.sqrt(n)
            rows.append({"n": n, "lambda": lam, "envelope": q / math.sqrt(n)})
        else:
            lam = stochasticity_parameter(sample).lam
            row = {"n": n, "lambda": lam}
            if n >= 16:
                row["metric_rate"] = (lam * math.sqrt(n)
                                      / (math.log(n) * math.log(math.log(n)) ** (1 + epsilon)))
            rows.append(row)
    final = rows[-1]["lambda"]
    if rational:
        limit = limits["rational_final_max"]
        inside = all(r["lambda"] <= r["envelope"] for r in rows)
        summary = {"convention": "discrete-uniform", "final_lambda": final, "threshold": limit,
                   "within_envelope": inside, "passed": inside and final < limit}
    else:
        limit = limits["irrational_final_max"]
        # the threshold is only meaningful when the partial quotients stay bounded
        bounded = isinstance(k, NamedConstant) and k.name in BOUNDED_QUOTIENTS
        summary = {"convention": "continuous-uniform", "final_lambda": final, "threshold": limit,
                   "diagnostic_only": not bounded,
                   "passed": (final < limit) if bounded else None}
    config = {"experiment": "decay", "k": str(k.name if isinstance(k, NamedConstant) else k),
              "checkpoints": checkpoints, "epsilon": epsilon, "seed": 0}
    return _result(config, rows, summary, started)
