"""Tests for the command-line front end: exit codes and printed summaries."""

import json

from triangle_opt.cli import main


def _write_config(tmp_path, **overrides):
    cfg = {
        "problem": {"kind": "quadratic", "dimension": 6, "seed": 2},
        "solver": {"mode": "mst_exact_L", "L": 1.0},
        "seeds": [0],
        "max_iters": 30,
    }
    cfg.update(overrides)
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_solve_writes_trace_and_prints_summary(tmp_path, capsys):
    config = _write_config(tmp_path)
    out = str(tmp_path / "trace.csv")
    rc = main(["solve", "--config", config, "--out", out])
    captured = capsys.readouterr()
    assert rc == 0
    assert "seed 0:" in captured.out
    assert "final gap" in captured.out
    assert out in captured.out
    header = open(out).readline().strip()
    assert header == "k,A,alpha,L_trial,j,m,cum_f,cum_grad,cum_stoch,gap"


def test_solve_seed_override_limits_the_batch(tmp_path, capsys):
    config = _write_config(tmp_path, seeds=[0, 1, 2])
    rc = main(["solve", "--config", config, "--seed", "7"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "seed 7:" in captured.out
    assert "seed 0:" not in captured.out


def test_solve_bad_config_is_an_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"problem": {"kind": "quadratic"}}')
    rc = main(["solve", "--config", str(path)])
    captured = capsys.readouterr()
    assert rc == 1
    assert "error" in captured.err
    rc = main(["solve", "--config", str(tmp_path / "missing.json")])
    captured = capsys.readouterr()
    assert rc == 1
    assert "cannot read config" in captured.err


def test_solve_reports_per_seed_failures(tmp_path, capsys):
    config = _write_config(
        tmp_path, solver={"mode": "amst_adaptive", "L0": 2.0 ** -12,
                          "max_backtracks": 3})
    rc = main(["solve", "--config", config])
    captured = capsys.readouterr()
    assert rc == 1
    assert "BacktrackLimitExceeded" in captured.out


def test_check_pass_and_fail_exit_codes(tmp_path, capsys):
    config = _write_config(tmp_path)
    out = str(tmp_path / "trace.csv")
    assert main(["solve", "--config", config, "--out", out]) == 0
    capsys.readouterr()

    rc = main(["check", "--trace", out, "--theorem", "t1",
               "--L", "1.0", "--R2", "2.0"])
    captured = capsys.readouterr()
    assert rc == 0
    assert "t1: pass" in captured.out

    # an impossibly small R2 makes the bound fail; failing rows are listed
    rc = main(["check", "--trace", out, "--theorem", "t1",
               "--L", "1.0", "--R2", "1e-9"])
    captured = capsys.readouterr()
    assert rc == 2
    assert "t1: FAIL" in captured.out
    assert "k=" in captured.out


def test_check_missing_parameter_is_an_error(tmp_path, capsys):
    config = _write_config(tmp_path)
    out = str(tmp_path / "trace.csv")
    assert main(["solve", "--config", config, "--out", out]) == 0
    capsys.readouterr()
    rc = main(["check", "--trace", out, "--theorem", "t1", "--L", "1.0"])
    captured = capsys.readouterr()
    assert rc == 1
    assert "ConfigError" in captured.err


def test_check_unreadable_trace_is_an_error(tmp_path, capsys):
    rc = main(["check", "--trace", str(tmp_path / "none.csv"),
               "--theorem", "t1", "--L", "1", "--R2", "1"])
    captured = capsys.readouterr()
    assert rc == 1
    assert "error" in captured.err


def test_zoo_list_and_describe(capsys):
    rc = main(["zoo", "list"])
    captured = capsys.readouterr()
    assert rc == 0
    kinds = captured.out.split()
    assert "quadratic" in kinds and "simplex_linear" in kinds

    rc = main(["zoo", "describe", "lasso"])
    captured = capsys.readouterr()
    assert rc == 0
    assert captured.out.startswith("lasso:")

    rc = main(["zoo", "describe", "cubic"])
    captured = capsys.readouterr()
    assert rc == 1
    assert "unknown problem kind" in captured.err

    rc = main(["zoo", "describe"])
    captured = capsys.readouterr()
    assert rc == 1
    assert "describe needs a problem kind" in captured.err
