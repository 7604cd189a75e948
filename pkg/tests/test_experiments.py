import json
import math

import pytest

from stochparam.counting import Sample, stochasticity_parameter
from stochparam.errors import InvalidArgument
from stochparam.experiments import (ExperimentConfig, ExperimentResult, arithmetic_decay,
                                    arnold_comparison, arnold_sequences, lil_tracker,
                                    load_thresholds, theorem1_experiment, theorem1_lambdas)


def brute_lambda(values, lo, hi):
    n = len(values)
    best = 0.0
    for x in values:
        F = (x - lo) / (hi - lo)
        best = max(best, abs(sum(v <= x for v in values) - n * F), abs(sum(v < x for v in values) - n * F))
    return best / math.sqrt(n)


def test_arnold_comparison():
    result = arnold_comparison()
    s = result.summary
    assert s["passed"] is True
    assert abs(s["geometric_lambda"] - 0.70) <= 0.03 and abs(s["arithmetic_lambda"] - 0.33) <= 0.03
    assert s["arithmetic_phi"] < 1e-3
    for name, terms in arnold_sequences().items():
        assert len(terms) == 15 and all(isinstance(t, int) and 0 <= t <= 99 for t in terms)
        assert abs(s[f"{name}_lambda"] - brute_lambda(terms, 0, 100)) <= 1e-12
    rows = {r["sequence"]: r for r in result.replications}
    assert rows["arithmetic"]["lambda_discrete"] != rows["arithmetic"]["lambda_continuous"]


def test_arnold_threshold_override(tmp_path):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"arnold": {"tolerance": 0.001}, "_note": "tight"}))
    assert arnold_comparison(load_thresholds(path)).passed is False
    with pytest.raises(InvalidArgument):
        load_thresholds(tmp_path / "missing.json")


def test_experiment_config_needs_seed():
    with pytest.raises(InvalidArgument):
        ExperimentConfig("theorem1", {"n": 10})
    assert ExperimentConfig("theorem1", {"seed": 1}).params["seed"] == 1


def test_theorem1_replay_and_workers():
    a = theorem1_experiment("e", 1, 32, 300, seed=2)
    b = theorem1_experiment("e", 1, 32, 300, seed=2, workers=2)
    assert a.statistics() == b.statistics()
    assert a.config["a"] == "e" and a.config["n"] == 32 and a.config["seed"] == 2
    assert len(a.replications) == 300
    c = theorem1_experiment("e", 1, 32, 300, seed=3)
    assert c.statistics() != a.statistics()


def test_theorem1_lambdas_match_direct_computation():
    from stochparam.precision import NamedConstant
    from stochparam.sequences import GeometricRealSpec, geometric_real_terms
    starts, lams = theorem1_lambdas("pi", 2, 20, 5, seed=1)
    for A, lam in zip(starts, lams):
        terms = [float(t) for t in geometric_real_terms(GeometricRealSpec(NamedConstant("pi"), float(A), 2, 20))]
        assert lam == pytest.approx(stochasticity_parameter(Sample(terms, 0, 2)).lam, abs=1e-12)


def test_theorem1_degenerate_and_rejected():
    one = theorem1_experiment("e", 1, 16, 1, seed=0)
    assert one.summary["diagnostic_only"] and one.passed is None
    assert one.summary["ks_distance"] >= 0.5
    for bad in ("2", "3/2", "sqrt2"):
        with pytest.raises(InvalidArgument):
            theorem1_experiment(bad, 1, 16, 10, seed=0)


def test_lil_schema_has_no_verdict():
    result = lil_tracker("iid", [16, 100, 1000], seed=1)
    assert "passed" not in result.summary and result.passed is None
    assert all("passed" not in row for row in result.replications)
    assert result.summary["constant"] == pytest.approx(1 / math.sqrt(2))
    running = [r["running_max"] for r in result.replications]
    assert running == sorted(running)
    for row in result.replications:
        assert row["ratio"] == pytest.approx(row["lambda"] / math.sqrt(math.log(math.log(row["n"]))))


def test_lil_constant_source_is_anomalous():
    result = lil_tracker("constant", [100, 10_000], value=0.5)
    # lambda_n = sqrt(n)/2 for a constant sequence at 1/2
    assert result.replications[-1]["lambda"] == pytest.approx(50.0)
    assert result.summary["anomalous"] is True


def test_lil_geometric_sources():
    two = lil_tracker("geometric", [100, 1000], seed=1, a="2")
    assert two.summary["constant"] == pytest.approx(math.sqrt(84) / 9)
    real = lil_tracker("geometric", [20, 200], seed=1, a="e", A="0.123")
    assert real.summary["constant"] == pytest.approx(1 / math.sqrt(2))
    assert real.config["A"] == "0.123"  # echoed as given


@pytest.mark.parametrize("kw", [dict(checkpoints=[10, 100]), dict(checkpoints=[100, 50]),
                                dict(checkpoints=[]), dict(source="walk"), dict(source="geometric")])
def test_lil_validation(kw):
    args = dict(source="iid", checkpoints=[100, 1000])
    args.update(kw)
    with pytest.raises(InvalidArgument):
        lil_tracker(**args)


def test_decay_rational():
    result = arithmetic_decay("37/100")
    rows = result.replications
    assert [r["n"] for r in rows] == [100 * 2**j for j in range(11)]
    # full periods are perfectly balanced
    assert all(r["lambda"] == 0.0 for r in rows)
    assert result.passed is True
    partial = arithmetic_decay("37/100", [50, 150, 1000, 1050])
    assert all(r["lambda"] <= r["envelope"] for r in partial.replications)
    assert partial.replications[2]["lambda"] == 0.0


def test_decay_irrational():
    phi = arithmetic_decay("phi", [100, 1000, 10_000, 100_000])
    assert phi.summary["diagnostic_only"] is False and phi.passed is True
    lams = [r["lambda"] for r in phi.replications]
    assert lams == sorted(lams, reverse=True)
    e = arithmetic_decay("e", [100, 10_000])
    assert e.summary["diagnostic_only"] is True and e.passed is None
    assert "metric_rate" in e.replications[0]


def test_save_roundtrip(tmp_path):
    result = lil_tracker("iid", [16, 256], seed=4)
    json_path, csv_path = result.save(tmp_path / "run" / "lil")
    data = json.loads(json_path.read_text())
    assert data["schema_version"] == 1 and data["version"] == result.version
    back = ExperimentResult.from_dict(data)
    assert back.statistics() == result.statistics()
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("# lil seed=4")
    assert lines[1] == "n,lambda,ratio,running_max" and len(lines) == 4


def test_replay_bit_identical():
    a = lil_tracker("iid", [16, 1000], seed=11)
    b = lil_tracker("iid", [16, 1000], seed=11)
    assert a.statistics() == b.statistics()
    assert json.dumps(a.statistics(), sort_keys=True) == json.dumps(b.statistics(), sort_keys=True)
