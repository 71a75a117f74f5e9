import os

import numpy as np
import pytest

from sonata import cli, metrics
from sonata.errors import ConfigError

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def write_config(tmp_path, body, name="run.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


FAST_LASSO = """
[problem]
name = lasso
m = 4
n = 6
d = 10
sparsity = 0.5
noise_sd = 0.2
lambda = 0.3
seed = 0

[graph]
type = erdos_renyi
p = 0.6
seed = 1

[gossip]
rho_target = 0.3

[algorithm]
mode = tuned
max_iters = 300
stop_tol = 1e-13
seed = 5
"""


def test_run_writes_trace_and_summary(tmp_path, capsys):
    cfg = write_config(tmp_path, FAST_LASSO)
    out = tmp_path / "out"
    code = cli.main(["run", "--config", cfg, "--out", str(out), "--quiet"])
    assert code == cli.EXIT_OK
    trace = metrics.Trace.from_csv(out / "trace.csv")
    assert len(trace) >= 2
    summary = (out / "summary.txt").read_text()
    assert "iterations = " in summary
    assert "alpha = " in summary


def test_run_is_byte_deterministic(tmp_path):
    cfg = write_config(tmp_path, FAST_LASSO)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["run", "--config", cfg, "--out", str(out1),
                     "--quiet"]) == cli.EXIT_OK
    assert cli.main(["run", "--config", cfg, "--out", str(out2),
                     "--quiet"]) == cli.EXIT_OK
    assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()


def test_verify_reports_checks(tmp_path, capsys):
    cfg = write_config(tmp_path, FAST_LASSO)
    out = tmp_path / "out"
    code = cli.main(["verify", "--config", cfg, "--out", str(out)])
    assert code == cli.EXIT_OK
    printed = capsys.readouterr().out
    for name in ("tracking_bound", "consensus_dynamics",
                 "lyapunov_descent", "subgradient_bound"):
        assert f"{name}: pass" in printed


def test_missing_config_is_an_error(tmp_path, capsys):
    code = cli.main(["run", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_ERROR
    assert "error:" in capsys.readouterr().err


def test_malformed_values_are_config_errors(tmp_path):
    cfg = write_config(tmp_path, FAST_LASSO.replace("m = 4", "m = four"))
    code = cli.main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_ERROR


def test_unknown_problem_name(tmp_path):
    cfg = write_config(tmp_path, FAST_LASSO.replace("name = lasso",
                                                    "name = ridge"))
    code = cli.main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_ERROR


def test_missing_required_key(tmp_path):
    body = FAST_LASSO.replace("lambda = 0.3\n", "")
    cfg = write_config(tmp_path, body)
    code = cli.main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_ERROR


def test_explicit_mode_uses_given_alpha(tmp_path):
    body = FAST_LASSO.replace("mode = tuned", "mode = explicit\nalpha = 0.05")
    cfg = write_config(tmp_path, body)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", cfg, "--out", str(out),
                     "--quiet"]) == cli.EXIT_OK
    summary = dict(line.split(" = ", 1)
                   for line in (out / "summary.txt").read_text().splitlines())
    assert float(summary["alpha"]) == 0.05


def test_weak_mixing_without_boost_is_an_error(tmp_path):
    body = FAST_LASSO.replace("rho_target = 0.3", "")
    body = body.replace("type = erdos_renyi\np = 0.6\nseed = 1", "type = path")
    body = body.replace("m = 4", "m = 12")
    cfg = write_config(tmp_path, body)
    code = cli.main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_ERROR


def test_constants_subcommand(capsys):
    code = cli.main(["constants", "--L", "2", "--Lmx", "2", "--wmx", "1",
                     "--rho", "0", "--alpha", "0.25", "--gamma", "1",
                     "--xi", "2", "--kappa", "1", "--theta", "0.5"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "c2t" in out and "omega" in out
    # last two lines are a machine-readable CSV pair
    lines = out.strip().splitlines()
    header, values = lines[-2].split(","), lines[-1].split(",")
    assert len(header) == len(values)
    row = dict(zip(header, values))
    assert float(row["c2t"]) == pytest.approx(2.0)
    assert float(row["c6t"]) == pytest.approx(31.0)


def test_sweep_runs_each_value(tmp_path):
    cfg = write_config(tmp_path, FAST_LASSO)
    out = tmp_path / "sweep"
    code = cli.main(["sweep", "--config", cfg,
                     "--parameter", "algorithm.max_iters",
                     "--values", "50,80", "--out", str(out), "--quiet"])
    assert code == cli.EXIT_OK
    t50 = metrics.Trace.from_csv(out / "max_iters_50" / "trace.csv")
    t80 = metrics.Trace.from_csv(out / "max_iters_80" / "trace.csv")
    assert t50.records[-1].nu == 50
    assert t80.records[-1].nu == 80
    # the shared prefix of the two runs is identical
    for a, b in zip(t50.records, t80.records):
        assert a.csv_row() == b.csv_row()


def test_sweep_rejects_bare_parameter(tmp_path, capsys):
    cfg = write_config(tmp_path, FAST_LASSO)
    code = cli.main(["sweep", "--config", cfg, "--parameter", "alpha",
                     "--values", "0.1", "--out", str(tmp_path), "--quiet"])
    assert code == cli.EXIT_ERROR


def test_bundled_configs_parse():
    for name in os.listdir(CONFIG_DIR):
        cp = cli._parse_config(os.path.join(CONFIG_DIR, name))
        assert cp.has_section("problem")
        assert cp.has_option("problem", "name")


def test_synthetic_config_uses_exact_reference(tmp_path):
    body = """
[problem]
name = synthetic_kl
theta = 0.75
m = 3
seed = 0

[graph]
type = complete

[algorithm]
mode = tuned
max_iters = 200
stop_tol = 0
seed = 1
"""
    cfg = write_config(tmp_path, body)
    out = tmp_path / "out"
    assert cli.main(["run", "--config", cfg, "--out", str(out),
                     "--quiet"]) == cli.EXIT_OK
    trace = metrics.Trace.from_csv(out / "trace.csv")
    dists = trace.column("dist_ref")
    assert np.isfinite(dists).all()
    assert dists[-1] < dists[0]
