"""Tests for experiment configuration parsing, batch running, and the
trace-vs-guarantee bound checker."""

import json
import math

import numpy as np
import pytest

from triangle_opt import (THEOREM_IDS, ConfigError, MissingColumn, ParseError,
                          SolverConfig, Trace, ValidationError, check_bounds,
                          load_experiment, load_trace, make_problem, run,
                          run_experiment)
from triangle_opt.harness import _seed_output_path, _worker_count


def _config_dict(**overrides):
    base = {
        "problem": {"kind": "quadratic", "dimension": 6, "seed": 2, "lam_min": 0.5},
        "solver": {"mode": "mst_exact_L", "L": 1.0},
        "seeds": [0],
        "max_iters": 40,
    }
    base.update(overrides)
    return base


def _load(**overrides):
    return load_experiment(json.dumps(_config_dict(**overrides)))


def test_load_experiment_valid_config():
    exp = _load(output="trace.csv", epsilon=1e-3)
    assert exp.problem.spec.kind == "quadratic"
    assert exp.problem.spec.dimension == 6
    assert exp.config.mode == "mst_exact_L"
    assert exp.config.L_known == 1.0
    assert exp.config.epsilon == 1e-3
    assert exp.config.max_iters == 40
    assert exp.seeds == [0]
    assert exp.output == "trace.csv"


def test_load_experiment_rejects_duplicate_keys():
    text = ('{"problem": {"kind": "quadratic"}, "solver": {"mode": "mst_exact_L", "L": 1},'
            ' "seeds": [0], "max_iters": 5, "max_iters": 6}')
    with pytest.raises(ParseError):
        load_experiment(text)


def test_load_experiment_rejects_malformed_json():
    with pytest.raises(ParseError):
        load_experiment("{not json")
    with pytest.raises(ValidationError):
        load_experiment("[1, 2, 3]")


def test_load_experiment_rejects_unknown_keys():
    with pytest.raises(ValidationError):
        _load(extra=1)
    with pytest.raises(ValidationError):
        _load(problem={"kind": "quadratic", "rows": 10})
    with pytest.raises(ValidationError):
        _load(prox={"modulus": 2.0})
    with pytest.raises(ValidationError):
        _load(solver={"mode": "mst_exact_L", "L": 1.0, "step": 0.1})
    with pytest.raises(ValidationError):
        _load(solver={"mode": "mst_exact_L", "L": 1.0,
                      "stopping": {"kind": "iterations_only", "limit": 3}})


def test_load_experiment_rejects_missing_sections():
    for key in ("problem", "solver", "seeds", "max_iters"):
        cfg = _config_dict()
        del cfg[key]
        with pytest.raises(ValidationError):
            load_experiment(json.dumps(cfg))
    with pytest.raises(ValidationError):
        _load(problem={"dimension": 4})
    with pytest.raises(ValidationError):
        _load(solver={"L": 1.0})


def test_load_experiment_sumst_requires_variance_bound():
    with pytest.raises(ValidationError, match='requires "D"'):
        _load(solver={"mode": "sumst_stochastic_universal", "L0": 1.0}, epsilon=1e-2)


def test_load_experiment_validates_seeds_and_iters():
    with pytest.raises(ValidationError):
        _load(seeds=[])
    with pytest.raises(ValidationError):
        _load(seeds="0")
    with pytest.raises(ValidationError):
        _load(seeds=[0, True])
    with pytest.raises(ValidationError):
        _load(seeds=[0, 1.5])
    with pytest.raises(ValidationError):
        _load(max_iters=0)
    with pytest.raises(ValidationError):
        _load(max_iters=True)
    with pytest.raises(ValidationError):
        _load(output=7)


def test_load_experiment_rejects_non_numeric_fields():
    with pytest.raises(ValidationError, match="solver.L"):
        _load(solver={"mode": "mst_exact_L", "L": "meta"})
    with pytest.raises(ValidationError, match="solver.L0"):
        _load(solver={"mode": "amst_adaptive", "L0": "auto"})
    with pytest.raises(ValidationError, match="solver.mu"):
        _load(solver={"mode": "mst_exact_L", "L": 1.0, "mu": True})
    with pytest.raises(ValidationError, match="solver.max_backtracks"):
        _load(solver={"mode": "mst_exact_L", "L": 1.0, "max_backtracks": 2.5})
    with pytest.raises(ValidationError, match="stopping.threshold"):
        _load(solver={"mode": "mst_exact_L", "L": 1.0,
                      "stopping": {"kind": "gradient_mapping", "threshold": "small"}})
    with pytest.raises(ValidationError, match="prox.omega_tilde"):
        _load(prox={"omega_tilde": [1.0]})
    with pytest.raises(ValidationError, match="epsilon.*finite"):
        _load(epsilon=math.inf)


def test_load_experiment_wraps_solver_config_errors():
    with pytest.raises(ValidationError):
        _load(solver={"mode": "newton"})
    with pytest.raises(ValidationError):
        _load(solver={"mode": "mst_exact_L"})  # exact mode needs L
    with pytest.raises(ValidationError):
        _load(problem={"kind": "quadratic", "lam_min": -1.0})


def test_load_experiment_prox_override_reaches_setup_and_solver():
    exp = _load(prox={"omega_tilde": 2.0})
    assert exp.problem.setup.omega_tilde == 2.0
    assert exp.config.omega_tilde == 2.0


def test_seed_output_path():
    assert _seed_output_path(None, 3, 5) is None
    assert _seed_output_path("runs/s{seed}.csv", 3, 5) == "runs/s3.csv"
    assert _seed_output_path("out.csv", 7, 1) == "out.csv"
    assert _seed_output_path("out.csv", 7, 2) == "out_seed7.csv"
    assert _seed_output_path("outfile", 7, 2) == "outfile_seed7"


def test_worker_count_env_cap(monkeypatch):
    monkeypatch.setenv("TRIANGLE_OPT_THREADS", "2")
    assert _worker_count(5) == 2
    assert _worker_count(1) == 1
    monkeypatch.setenv("TRIANGLE_OPT_THREADS", "abc")
    with pytest.raises(ConfigError):
        _worker_count(5)
    monkeypatch.setenv("TRIANGLE_OPT_THREADS", "0")
    with pytest.raises(ConfigError):
        _worker_count(5)
    monkeypatch.delenv("TRIANGLE_OPT_THREADS")
    assert _worker_count(3) >= 1


def test_run_experiment_single_seed_writes_trace(tmp_path):
    out = tmp_path / "trace.csv"
    exp = _load(output=str(out))
    results = run_experiment(exp)
    assert len(results) == 1
    res = results[0]
    assert res.error is None
    assert res.seed == 0
    assert res.path == str(out)
    loaded = load_trace(str(out))
    assert len(loaded) == len(res.trace) == 40
    assert np.array_equal(loaded.column("k"), res.trace.column("k"))
    assert loaded.last("gap") == pytest.approx(res.trace.last("gap"), rel=1e-15)


def test_run_experiment_multi_seed_deterministic(tmp_path):
    cfg = {
        "problem": {"kind": "quadratic", "dimension": 5, "seed": 1},
        "solver": {"mode": "sumst_stochastic_universal", "L0": 1.0, "D": 0.5},
        "epsilon": 1e-2,
        "seeds": [0, 1],
        "max_iters": 10,
        "output": str(tmp_path / "s{seed}.json"),
    }
    first = run_experiment(load_experiment(json.dumps(cfg)))
    second = run_experiment(load_experiment(json.dumps(cfg)))
    assert [r.seed for r in first] == [0, 1]
    for a, b in zip(first, second):
        assert a.error is None and b.error is None
        assert np.array_equal(a.trace.column("gap"), b.trace.column("gap"))
        assert np.array_equal(a.trace.column("m"), b.trace.column("m"))
    # the two seeds draw different noise
    assert not np.array_equal(first[0].trace.column("gap")[1:],
                              first[1].trace.column("gap")[1:])
    for seed in (0, 1):
        loaded = load_trace(str(tmp_path / f"s{seed}.json"))
        assert len(loaded) == 10


def test_run_experiment_records_per_seed_errors():
    exp = _load(solver={"mode": "amst_adaptive", "L0": 2.0 ** -12,
                        "max_backtracks": 3})
    results = run_experiment(exp)
    assert len(results) == 1
    assert results[0].trace is None
    assert results[0].report is None
    assert "BacktrackLimitExceeded" in results[0].error


def _mst_report(dimension=8, seed=2, iters=60, mu=0.0, lam_min=0.02):
    problem = make_problem("quadratic", dimension=dimension, seed=seed,
                           lam_min=lam_min)
    meta = problem.objective.smoothness_meta
    config = SolverConfig(mode="mst_exact_L", L_known=meta["L"], mu=mu,
                          max_iters=iters)
    return problem, run(problem.objective, problem.setup, config)


def test_check_bounds_t1_passes_on_real_run():
    problem, report = _mst_report()
    # prox center is the origin, so d(x*) = ||x*||^2 / 2 = 2
    check = check_bounds(report.trace, "t1",
                         {"L": problem.objective.smoothness_meta["L"], "R2": 2.0})
    assert check.passed
    assert check.worst_margin >= 0.0
    assert check.failing_k == []
    assert len(check.rows) == 60
    assert "pass" in check.summary()


def test_check_bounds_t1_catches_an_inflated_gap():
    problem, report = _mst_report()
    trace = report.trace
    gaps = list(trace.data["gap"])
    gaps[30] = 4.0 * 1.0 * 2.0 / 31.0 ** 2 * 1.5
    trace.data["gap"] = gaps
    check = check_bounds(trace, "t1", {"L": 1.0, "R2": 2.0})
    assert not check.passed
    assert 30 in check.failing_k
    assert check.worst_margin < 0.0
    assert "FAIL" in check.summary()
    assert "30" in check.summary()


def test_check_bounds_t2_t3_strongly_convex():
    problem, report = _mst_report(mu=0.5, lam_min=0.5, iters=120)
    check = check_bounds(report.trace, "t2_t3",
                         {"L": 1.0, "R2": 2.0, "mu": 0.5})
    assert check.passed
    # the exponential branch is the binding one late in the run
    late = check.rows[-1]
    assert late["bound"] == pytest.approx(
        2.0 * math.exp(-0.5 * math.sqrt(0.5) * late["k"]), rel=1e-12)


def test_check_bounds_c1_and_c2_on_in_memory_trace():
    problem, report = _mst_report(iters=50)
    c1 = check_bounds(report.trace, "c1", {"R2": 2.0})
    assert c1.passed and len(c1.rows) == 50
    c2 = check_bounds(report.trace, "c2", {"L": 1.0, "R2": 2.0})
    assert c2.passed
    # row k = 0 is excluded from the 1/k^2 bound
    assert c2.rows[0]["k"] == 1


def test_check_bounds_c1_needs_distance_columns(tmp_path):
    problem, report = _mst_report(iters=10)
    path = str(tmp_path / "t.csv")
    from triangle_opt import emit_trace
    emit_trace(report.trace, "csv", path)
    loaded = load_trace(path)
    # the serialized schema drops the distance diagnostics
    with pytest.raises(MissingColumn):
        check_bounds(loaded, "c1", {"R2": 2.0, "x0_y0_sq": 0.0})
    # and serialization also drops the meta scalars the check can fall back on
    with pytest.raises(ConfigError):
        check_bounds(loaded, "c1", {"R2": 2.0})


def test_check_bounds_t6_work():
    problem = make_problem("quadratic", dimension=8, seed=2)
    config = SolverConfig(mode="amst_adaptive", L0=1.0 / 32.0, max_iters=80)
    report = run(problem.objective, problem.setup, config)
    check = check_bounds(report.trace, "t6_work", {"L": 1.0})
    assert check.passed


def test_check_bounds_t9_scaling():
    points = [(1e-1, 122), (1e-2, 766), (1e-3, 4847), (1e-4, 30559)]
    check = check_bounds(None, "t9_scaling", {"nu": 0.5, "points": points})
    assert check.passed
    assert check.rows[0]["measured"] == pytest.approx(0.800, abs=5e-3)
    with pytest.raises(ConfigError):
        check_bounds(None, "t9_scaling", {"nu": 0.5, "points": points[:1]})
    with pytest.raises(ConfigError):
        check_bounds(None, "t9_scaling", {"points": points})


def test_check_bounds_t10_calls():
    trace = Trace()
    for k in range(6):
        trace.append(k=k, A=float(k), alpha=1.0, L_trial=1.0, j=0, m=4,
                     cum_f=2 * k, cum_grad=k, cum_stoch=4 * k, gap=1.0 / (k + 1))
    check = check_bounds(trace, "t10_calls", {"D": 1.0, "R2": 0.5, "epsilon": 0.1})
    assert check.passed
    assert check.rows[0]["k"] == 5
    assert check.rows[0]["bound"] == pytest.approx(4.0 * (4.0 * 1.0 * 0.5 / 0.01 + 10.0))
    greedy = Trace()
    for k in range(6):
        greedy.append(k=k, A=float(k), alpha=1.0, L_trial=1.0, j=0, m=100,
                      cum_f=2 * k, cum_grad=k, cum_stoch=100 * k, gap=1.0 / (k + 1))
    tight = check_bounds(greedy, "t10_calls", {"D": 1.0, "R2": 0.5, "epsilon": 10.0})
    assert not tight.passed


def test_check_bounds_t5_halving_params_beat_meta():
    trace = Trace()
    trace.meta["mu"] = 1.0
    trace.meta["y0_dist_sq"] = 8.0
    for k in range(4):
        trace.append(k=k, A=1.0, alpha=1.0, L_trial=1.0, j=0, m=1,
                     cum_f=k, cum_grad=k, cum_stoch=0, gap=0.5 * 8.0 / 2.0 ** (k + 1))
    via_meta = check_bounds(trace, "t5_halving", {})
    assert via_meta.passed
    assert via_meta.rows[0]["bound"] == pytest.approx(4.0)
    via_params = check_bounds(trace, "t5_halving", {"mu": 0.5, "y0_dist_sq": 8.0})
    assert via_params.rows[0]["bound"] == pytest.approx(2.0)
    trace.meta.clear()
    with pytest.raises(ConfigError):
        check_bounds(trace, "t5_halving", {"mu": 0.5})


def test_check_bounds_rejects_bad_requests():
    problem, report = _mst_report(iters=5)
    with pytest.raises(ConfigError):
        check_bounds(report.trace, "t99", {})
    with pytest.raises(ConfigError):
        check_bounds(None, "t1", {"L": 1.0, "R2": 1.0})
    with pytest.raises(ConfigError):
        check_bounds(report.trace, "t1", {"R2": 1.0})
    assert set(THEOREM_IDS) == {"t1", "t2_t3", "c1", "c2", "t6_work",
                                "t9_scaling", "t10_calls", "t5_halving"}


def test_check_bounds_vacuous_on_a_truncated_trace():
    trace = Trace()
    trace.append(k=0, A=1.0, alpha=1.0, L_trial=1.0, j=0, m=1,
                 cum_f=1, cum_grad=1, cum_stoch=0, gap=5.0)
    check = check_bounds(trace, "c2", {"L": 1.0, "R2": 1.0, "x0_y0_sq": 0.0})
    assert check.passed
    assert check.rows == []
    assert check.worst_margin == math.inf
