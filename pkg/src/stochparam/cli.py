"""Command-line entry point: ``stochparam <command> ...``.

Exit status: 0 success, 1 invalid input, 2 resource limit, 3 failed experiment.
"""

from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from . import rng as _rng
from .contfrac import discrepancy_bound_from_quotients, expand, star_discrepancy_of_multiples
from .counting import (Bernoulli, ContinuousUniform, DiscreteUniform, Sample, ks_distance,
                       parse_cdf, star_discrepancy, stochasticity_parameter, weyl_sum)
from .distributions import half_normal_cdf, kolmogorov_cdf, kolmogorov_quantile
from .errors import ExperimentFailure, InvalidArgument, ResourceLimit
from .experiments import (arithmetic_decay, arnold_comparison, lil_tracker, load_thresholds,
                          theorem1_experiment)
from .precision import NamedConstant, is_exact, parse_real
from .sequences import (ArithmeticSpec, GeometricIntSpec, GeometricRealSpec, arithmetic_terms,
                        geometric_int_terms, geometric_real_terms)
from .simulate import (CovarianceSpec, KOLMOGOROV, bernoulli_lambda, covariance_identity,
                       discrete_bridge_max, draw_starts, siegmund_shift, vectorized)

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE, EXIT_FAILED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default, which is reserved for resource limits
    def error(self, message):
        raise InvalidArgument(f"{self.prog}: {message}")


# -- input helpers ---------------------------------------------------------------------


def read_sequence(path: str) -> np.ndarray:
    """One decimal (or named constant) per line; blank lines and ``#`` comments skipped."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise InvalidArgument(f"--input: file not found: {path}") from exc
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(parse_real(line)))
        except InvalidArgument as exc:
            raise InvalidArgument(f"--input {path}, line {lineno}: {exc}") from exc
    if not values:
        raise InvalidArgument(f"--input {path} contains no values")
    return np.array(values)


def _support(cdf) -> tuple[float, float]:
    if isinstance(cdf, ContinuousUniform):
        return float(cdf.lo), float(cdf.hi)
    if isinstance(cdf, DiscreteUniform):
        return cdf.offset, cdf.offset + cdf.spacing * (cdf.N - 1)
    if isinstance(cdf, Bernoulli):
        return 0.0, 1.0
    return -math.inf, math.inf


def _sample_for(values: np.ndarray, cdf) -> Sample:
    lo, hi = _support(cdf)
    lo, hi = min(lo, values.min()), max(hi, values.max())
    return Sample(values, lo, hi if hi > lo else lo + 1.0)


def _real_arg(flag: str, text):
    try:
        return parse_real(text)
    except InvalidArgument as exc:
        raise InvalidArgument(f"{flag}: {exc}") from exc


def _int_list(flag: str, text: str) -> list[int]:
    out = []
    for item in text.split(","):
        try:
            value = float(item)
        except ValueError as exc:
            raise InvalidArgument(f"{flag}: cannot parse {item!r}") from exc
        if not value.is_integer():
            raise InvalidArgument(f"{flag}: {item!r} is not an integer")
        out.append(int(value))
    return out


def _label(value) -> str:
    return value.name if isinstance(value, NamedConstant) else str(value)


# -- output helpers --------------------------------------------------------------------


class _Output:
    def __init__(self, args):
        self.args = args
        self.json = args.json
        self.command = "stochparam " + " ".join(shlex.quote(a) for a in args.argv)

    def header(self) -> dict:
        return {"version": __version__, "seed": self.args.seed, "command": self.command,
                "generator": _rng.GENERATOR_ID}

    def emit(self, record: dict, lines: list[str]):
        if self.json:
            print(json.dumps({**self.header(), **record}, indent=2, sort_keys=True))
        else:
            print("\n".join(lines))

    def save_estimate(self, values: np.ndarray, summary: dict):
        if not self.args.output:
            return
        prefix = Path(self.args.output)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        meta = self.header()
        with prefix.with_suffix(".csv").open("w") as fh:
            fh.write(f"# {meta['command']}\n# version={__version__} seed={self.args.seed}\n")
            fh.write("value\n")
            fh.writelines(f"{v!r}\n" for v in np.sort(values).tolist())
        prefix.with_suffix(".json").write_text(
            json.dumps({**meta, **summary}, indent=2, sort_keys=True) + "\n")


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def _summary_lines(summary: dict) -> list[str]:
    return [f"{k}: {_fmt(v)}" for k, v in summary.items() if not isinstance(v, (dict, list))]


# -- commands --------------------------------------------------------------------------


def cmd_phi(args, out: _Output) -> int:
    if args.quantile is not None:
        value = kolmogorov_quantile(args.quantile)
        out.emit({"p": args.quantile, "quantile": value}, [f"{value:.12f}"])
        return EXIT_OK
    if args.x is None:
        raise InvalidArgument("phi: give x or --quantile p")
    x = float(_real_arg("x", args.x))
    value = kolmogorov_cdf(x)
    out.emit({"x": x, "phi": value}, [f"{value:.12f}"])
    return EXIT_OK


def cmd_lambda(args, out: _Output) -> int:
    values = read_sequence(args.input)
    cdf = parse_cdf(args.cdf)
    report = stochasticity_parameter(_sample_for(values, cdf), cdf)
    out.emit({"cdf": args.cdf, **report.as_dict()},
             [f"n: {report.n}", f"lambda: {report.lam:.12f}", f"F_n: {report.f_n:.12g}",
              f"argsup: {report.argsup!r} ({report.side})",
              f"phi(lambda): {report.phi_of_lambda:.12f}"])
    return EXIT_OK


def cmd_discrepancy(args, out: _Output) -> int:
    sample = Sample(read_sequence(args.input), 0.0, 1.0)
    d = star_discrepancy(sample)
    out.emit({"n": sample.n, "star_discrepancy": d, "sqrt_n_times_d": math.sqrt(sample.n) * d},
             [f"n: {sample.n}", f"D*: {d:.12g}", f"sqrt(n) D*: {math.sqrt(sample.n) * d:.12g}"])
    return EXIT_OK


def cmd_weyl(args, out: _Output) -> int:
    values = read_sequence(args.input)
    sample = Sample(values, min(0.0, values.min()), max(1.0, values.max()))
    hs = _int_list("--h", args.h)
    sums = {h: weyl_sum(sample, h) for h in hs}
    out.emit({"n": sample.n, "weyl_sums": {str(h): s for h, s in sums.items()}},
             [f"h={h}: {s:.12g}" for h, s in sums.items()])
    return EXIT_OK


def _decimal(x, digits: int) -> str:
    return f"{x:.{digits}f}"


def cmd_generate(args, out: _Output) -> int:
    kind = args.kind
    if kind == "arithmetic":
        k, N = _real_arg("--k", args.k), _real_arg("--mod", args.mod)
        spec = ArithmeticSpec(k, N, args.n, _real_arg("--offset", args.offset), args.from_zero)
        vals = arithmetic_terms(spec)
        text = [str(int(v)) if float(v).is_integer() else repr(float(v)) for v in vals]
        record = {"values": [float(v) for v in vals]}
    elif kind == "geometric" and all(is_exact(_real_arg(f, v)) and Fraction(_real_arg(f, v)).denominator == 1
                                     for f, v in (("--a", args.a), ("--A", args.A), ("--mod", args.mod))):
        spec = GeometricIntSpec(int(Fraction(args.a)), int(Fraction(args.A)), int(Fraction(args.mod)),
                                args.n, args.from_zero)
        vals = geometric_int_terms(spec)
        text = [str(v) for v in vals]
        record = {"values": vals}
    else:
        a = _real_arg("--a", args.a)
        N = _real_arg("--mod", args.mod) if kind == "geometric" else Fraction(args.mod or 1)
        if args.A is None:
            A = Fraction(float(draw_starts(1, 1, args.seed, 0)[0])) * N
        else:
            A = _real_arg("--A", args.A)
        spec = GeometricRealSpec(a, A, N, args.n, args.bits, args.from_zero)
        terms = geometric_real_terms(spec)
        digits = math.ceil(args.bits * math.log10(2))
        text = [_decimal(t, digits) for t in terms]
        record = {"values": text, "A": _label(A), "working_bits": spec.working_bits()}
    out.emit({"kind": kind, "n": args.n, "from_zero": args.from_zero, **record}, text)
    return EXIT_OK


def _expansion_covering(k, n: int, terms: int):
    """Expand until the denominators pass n (or the expansion ends)."""
    while True:
        exp = expand(k, terms)
        if exp.terminated or exp.denominators[-1] > n or exp.truncated:
            return exp
        terms *= 2


def cmd_contfrac(args, out: _Output) -> int:
    k = _real_arg("--k", args.k)
    if args.action == "expand":
        exp = expand(k, args.terms, args.bits)
        lines = [f"[{exp.a0}; {', '.join(map(str, exp.partial_quotients))}]",
                 f"terminated: {exp.terminated}", f"truncated: {exp.truncated}"]
        out.emit({"k": _label(k), **exp.as_dict()}, lines)
        return EXIT_OK
    if args.n is None:
        raise InvalidArgument("contfrac bound: --n is required")
    exp = _expansion_covering(k, args.n, args.terms)
    bound = discrepancy_bound_from_quotients(exp, args.n)
    record = {"k": _label(k), "n": args.n, "bound": bound}
    lines = [f"bound on n D*_n: {bound:.12g}"]
    if args.n <= args.exact_limit:
        exact = star_discrepancy_of_multiples(k, args.n)
        record["exact"] = exact
        lines.append(f"exact n D*_n: {exact:.12g}")
    out.emit(record, lines)
    return EXIT_OK


def cmd_simulate(args, out: _Output) -> int:
    if args.kind == "covariance":
        if not args.spec:
            raise InvalidArgument("simulate covariance: --spec is required")
        try:
            raw = json.loads(Path(args.spec).read_text())
        except FileNotFoundError as exc:
            raise InvalidArgument(f"--spec: file not found: {args.spec}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"--spec: invalid JSON: {exc}") from exc
        specs = raw if isinstance(raw, list) else [raw]
        rows = []
        for item in specs:
            try:
                spec = CovarianceSpec(item["coefficients"], item["thresholds"])
            except (KeyError, TypeError) as exc:
                raise InvalidArgument("--spec needs 'coefficients' and 'thresholds' lists") from exc
            integral, closed, bridge = covariance_identity(spec)
            rows.append({"coefficients": list(spec.coefficients), "thresholds": list(spec.thresholds),
                         "integral_form": integral, "closed_form": closed, "bridge_form": bridge,
                         "max_gap": max(integral, closed, bridge) - min(integral, closed, bridge)})
        out.emit({"kind": "covariance", "rows": rows},
                 [f"integral={r['integral_form']:.15g} closed={r['closed_form']:.15g} "
                  f"bridge={r['bridge_form']:.15g}" for r in rows])
        return EXIT_OK

    thresholds = load_thresholds(args.thresholds)
    if args.kind == "bridge-max":
        est = discrete_bridge_max(args.N, args.trials, args.seed, args.workers)
        ks = est.ks_distance(KOLMOGOROV)
        shift = siegmund_shift(args.N)
        shifted = ks_distance(est.values + shift, KOLMOGOROV)
        summary = {"kind": "bridge-max", "N": args.N, **est.summary(), "ks_kolmogorov": ks,
                   "ks_kolmogorov_threshold": thresholds["bridge_max"]["ks_max_kolmogorov"],
                   "siegmund_shift": shift, "ks_kolmogorov_shifted": shifted}
        if args.N == 2:
            summary["ks_half_normal"] = est.ks_distance(vectorized(half_normal_cdf))
            summary["ks_half_normal_threshold"] = thresholds["bridge_max"]["ks_max_half_normal"]
    else:
        est = bernoulli_lambda(args.n, args.trials, args.seed, args.workers)
        summary = {"kind": "bernoulli", "n": args.n, **est.summary(),
                   "ks_half_normal": est.ks_distance(vectorized(half_normal_cdf)),
                   "ks_half_normal_threshold": thresholds["bernoulli"]["ks_max_half_normal"]}
    summary["generator"] = _rng.GENERATOR_ID
    summary["gaussian"] = _rng.GAUSSIAN_METHOD
    out.save_estimate(est.values, summary)
    out.emit(summary, _summary_lines(summary))
    return EXIT_OK


def cmd_experiment(args, out: _Output) -> int:
    thresholds = load_thresholds(args.thresholds)
    name = args.name
    if name == "arnold":
        result = arnold_comparison(thresholds)
    elif name == "theorem1":
        result = theorem1_experiment(_real_arg("--a", args.a), _real_arg("--N", args.N), args.n,
                                     args.num_A, args.seed, args.workers, thresholds)
    elif name == "lil":
        checkpoints = _int_list("--checkpoints", args.checkpoints)
        a = None if args.a is None else _real_arg("--a", args.a)
        A = None if args.A is None else _real_arg("--A", args.A)
        result = lil_tracker(args.source, checkpoints, args.seed, a, A, args.value, thresholds)
    else:
        if args.k is None:
            raise InvalidArgument("experiment decay: --k is required")
        checkpoints = None if args.checkpoints is None else _int_list("--checkpoints", args.checkpoints)
        result = arithmetic_decay(_real_arg("--k", args.k), checkpoints, args.epsilon, thresholds)
    result.config["command"] = out.command
    if args.output:
        result.save(args.output)
    if out.json:
        print(result.to_json())
    else:
        print("\n".join(_summary_lines(result.summary)))
    if result.passed is False:
        raise ExperimentFailure(f"experiment {name} did not meet its threshold")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------


def _common(parser: argparse.ArgumentParser, top: bool):
    # leaf parsers use SUPPRESS so flags given after the subcommand override global ones
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    parser.add_argument("--seed", type=int, default=d(0), help="RNG seed (default 0)")
    parser.add_argument("--workers", type=int, default=d(1), help="worker processes; never changes results")
    parser.add_argument("--json", action="store_true", default=d(False), help="print JSON")
    parser.add_argument("--output", default=d(None), help="output prefix for .json/.csv files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stochparam", description="Kolmogorov stochasticity parameter toolkit.")
    parser.add_argument("--version", action="version", version=f"stochparam {__version__}")
    _common(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(subparsers, name, **kw):
        p = subparsers.add_parser(name, **kw)
        _common(p, top=False)
        return p

    p = leaf(sub, "phi", help="Kolmogorov distribution function")
    p.add_argument("x", nargs="?")
    p.add_argument("--quantile", type=float)
    p.set_defaults(func=cmd_phi)

    p = leaf(sub, "lambda", help="stochasticity parameter of a sequence file")
    p.add_argument("--input", required=True)
    p.add_argument("--cdf", default="uniform:0:1",
                   help="uniform:LO:HI, discrete:N[:SPACING[:OFFSET]] or bernoulli:P")
    p.set_defaults(func=cmd_lambda)

    p = leaf(sub, "discrepancy", help="star discrepancy of values in [0, 1]")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_discrepancy)

    p = leaf(sub, "weyl", help="normalised Weyl sums")
    p.add_argument("--input", required=True)
    p.add_argument("--h", default="1", help="comma-separated nonzero frequencies")
    p.set_defaults(func=cmd_weyl)

    gen = leaf(sub, "generate", help="arithmetic and geometric progressions")
    gsub = gen.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("arithmetic", "geometric", "lacunary"):
        g = leaf(gsub, kind)
        g.add_argument("--n", type=int, required=True)
        g.add_argument("--mod", default="100" if kind != "lacunary" else "1")
        g.add_argument("--from-zero", action="store_true", help="index terms from x = 0")
        if kind == "arithmetic":
            g.add_argument("--k", required=True)
            g.add_argument("--offset", default="0")
        else:
            g.add_argument("--a", required=True)
            g.add_argument("--A", default=None if kind == "lacunary" else "1")
            g.add_argument("--bits", type=int, default=64, help="correct output bits")
        g.set_defaults(func=cmd_generate)

    cf = leaf(sub, "contfrac", help="continued fractions and discrepancy bounds")
    csub = cf.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for action in ("expand", "bound"):
        c = leaf(csub, action)
        c.add_argument("--k", required=True)
        c.add_argument("--terms", type=int, default=50 if action == "expand" else 20)
        if action == "expand":
            c.add_argument("--bits", type=int, default=None)
        else:
            c.add_argument("--n", type=int, required=True)
            c.add_argument("--exact-limit", type=int, default=2_000_000,
                           help="also compute the exact value when n is at most this")
        c.set_defaults(func=cmd_contfrac)

    sim = leaf(sub, "simulate", help="Monte Carlo estimates")
    ssub = sim.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    s = leaf(ssub, "bridge-max")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--trials", type=int, default=100_000)
    s = leaf(ssub, "bernoulli")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--trials", type=int, default=100_000)
    s = leaf(ssub, "covariance")
    s.add_argument("--spec", required=True, help="JSON file: {coefficients, thresholds} or a list")
    for s in ssub.choices.values():
        s.add_argument("--thresholds", default=None, help="threshold JSON overriding the defaults")
        s.set_defaults(func=cmd_simulate)

    exp = leaf(sub, "experiment", help="seeded, persisted experiments")
    esub = exp.add_subparsers(dest="name", required=True, parser_class=_Parser)
    leaf(esub, "arnold")
    e = leaf(esub, "theorem1")
    e.add_argument("--a", default="e")
    e.add_argument("--N", default="1")
    e.add_argument("--n", type=int, default=256)
    e.add_argument("--num-A", dest="num_A", type=int, default=2000)
    e = leaf(esub, "lil")
    e.add_argument("--source", choices=("iid", "geometric", "constant"), default="iid")
    e.add_argument("--a")
    e.add_argument("--A")
    e.add_argument("--value", type=float, default=0.5, help="value of the constant source")
    e.add_argument("--checkpoints", default="1e3,1e4,1e5,1e6")
    e = leaf(esub, "decay")
    e.add_argument("--k")
    e.add_argument("--checkpoints")
    e.add_argument("--epsilon", type=float, default=0.1)
    for e in esub.choices.values():
        e.add_argument("--thresholds", default=None, help="threshold JSON overriding the defaults")
        e.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        args.argv = argv
        if args.seed < 0:
            raise InvalidArgument("--seed must be non-negative")
        if args.workers < 1:
            raise InvalidArgument("--workers must be at least 1")
        print(f"# stochparam {__version__} seed={args.seed}", file=sys.stderr)
        return args.func(args, _Output(args))
    except ResourceLimit as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ExperimentFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (InvalidArgument, ValueError, OverflowError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
