"""End-to-end command-line runs, exercised in process."""

from __future__ import annotations

import json

import pytest

from graphlim.cli import main
from graphlim.config import PARALLELISM_ENV_VAR
from graphlim.harness import read_records_csv

SMALL = ["--n", "60", "--replications", "50", "--seed", "17"]


def run_cli(*argv):
    return main(list(argv))


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def test_simulate_writes_outputs(tmp_path, capsys):
    rc = run_cli(
        "simulate",
        *SMALL,
        "--mc-samples",
        "2000",
        "--no-figures",
        "--out-dir",
        str(tmp_path),
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "wrote results.csv, summary.json" in out
    assert "50 replications" in out

    records = read_records_csv(tmp_path / "results.csv")
    assert len(records) == 50
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["n"] == 60
    assert summary["design"] == "deterministic"
    assert summary["sigma2_theory"] == pytest.approx(2395.0 / 12.0)
    assert summary["sigma2_mc"] is not None
    assert summary["qq_r2"] is not None
    assert len(summary["histogram"]) == 60
    assert not (tmp_path / "histogram.png").exists()


def test_simulate_renders_figures(tmp_path):
    rc = run_cli(
        "simulate",
        "--n",
        "40",
        "--replications",
        "40",
        "--bins",
        "13",
        "--mc-samples",
        "1000",
        "--out-dir",
        str(tmp_path),
    )
    assert rc == 0
    for name in ("histogram.png", "qq.png"):
        blob = (tmp_path / name).read_bytes()
        assert blob[:8] == b"\x89PNG\r\n\x1a\n"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["histogram"]) == 13


def test_simulate_outputs_independent_of_parallelism(tmp_path, monkeypatch):
    args = ["simulate", *SMALL, "--mc-samples", "500", "--no-figures"]
    dir_flag = tmp_path / "flag"
    dir_env = tmp_path / "env"

    assert run_cli(*args, "--out-dir", str(dir_flag), "--parallelism", "2") == 0
    monkeypatch.setenv(PARALLELISM_ENV_VAR, "2")
    assert run_cli(*args, "--out-dir", str(dir_env)) == 0

    for name in ("results.csv", "summary.json"):
        assert (dir_flag / name).read_bytes() == (dir_env / name).read_bytes()


# ---------------------------------------------------------------------------
# variance
# ---------------------------------------------------------------------------


def test_variance_to_stdout(capsys):
    rc = run_cli("variance", *SMALL, "--mc-samples", "20000")
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert list(payload) == ["sigma2", "se", "sigma2_over_n"]
    assert payload["sigma2"] == pytest.approx(2395.0 / 12.0, abs=5.0)
    assert payload["se"] > 0.0
    assert payload["sigma2_over_n"] == payload["sigma2"] / 60


def test_variance_to_file(tmp_path, capsys):
    out = tmp_path / "var.json"
    rc = run_cli("variance", *SMALL, "--mc-samples", "1000", "--out", str(out))
    assert rc == 0
    assert capsys.readouterr().out == ""
    payload = json.loads(out.read_text())
    assert set(payload) == {"sigma2", "se", "sigma2_over_n"}


def test_variance_seed_changes_estimate(capsys):
    assert run_cli("variance", "--seed", "1", "--mc-samples", "1000") == 0
    first = json.loads(capsys.readouterr().out)["sigma2"]
    assert run_cli("variance", "--seed", "2", "--mc-samples", "1000") == 0
    second = json.loads(capsys.readouterr().out)["sigma2"]
    assert first != second


# ---------------------------------------------------------------------------
# cutnorm / check
# ---------------------------------------------------------------------------


def test_cutnorm_exact_small_half_graph(capsys):
    rc = run_cli("cutnorm", "--n", "16", "--replications", "1")
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "exact"
    assert payload["n"] == 16
    assert payload["value"] == pytest.approx(0.03125, abs=1e-12)


def test_cutnorm_heuristic_beyond_exact_limit(capsys):
    rc = run_cli("cutnorm", "--n", "40", "--replications", "1")
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["method"] == "heuristic"
    assert 0.0 <= payload["value"] <= 0.03
    rc = run_cli("cutnorm", "--n", "16", "--replications", "1", "--method", "heuristic")
    assert rc == 0
    assert json.loads(capsys.readouterr().out)["method"] == "heuristic"


def test_check_reports_conditions(capsys):
    rc = run_cli("check", "--n", "30", "--replications", "1", "--grid-points", "64")
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"kernel", "graph", "scale"}
    assert "min_clipped_marginal" in payload["kernel"]
    assert "remainder_bound" in payload["graph"]
    assert payload["scale"]["kind"] == "dense"
    assert payload["scale"]["satisfies_growth_condition"] is True


# ---------------------------------------------------------------------------
# couple
# ---------------------------------------------------------------------------


def test_couple_writes_outputs(tmp_path, capsys):
    rc = run_cli(
        "couple",
        "--n",
        "12",
        "--replications",
        "5",
        "--seed",
        "3",
        "--out-dir",
        str(tmp_path),
    )
    assert rc == 0
    assert "wrote couplings.csv, couple_summary.json" in capsys.readouterr().out
    lines = (tmp_path / "couplings.csv").read_text().splitlines()
    assert lines[0] == "rep,d1,d2"
    assert len(lines) == 6
    summary = json.loads((tmp_path / "couple_summary.json").read_text())
    assert summary["n"] == 12
    assert summary["replications"] == 5
    assert summary["cut_gap"] is not None
    assert summary["n_times_var_d1"] > 0.0


def test_couple_no_gaps(tmp_path):
    rc = run_cli(
        "couple",
        "--n",
        "12",
        "--replications",
        "4",
        "--no-gaps",
        "--out-dir",
        str(tmp_path),
    )
    assert rc == 0
    summary = json.loads((tmp_path / "couple_summary.json").read_text())
    assert summary["cut_gap"] is None
    assert summary["l1_outcome_gap"] is None


# ---------------------------------------------------------------------------
# failure modes
# ---------------------------------------------------------------------------


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as excinfo:
        run_cli("simulate", "--preset", "no_such_preset")
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit) as excinfo:
        run_cli()
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit) as excinfo:
        run_cli("simulate", "--config", "a.json", "--preset", "paper_sec4_dense")
    assert excinfo.value.code == 1


def test_config_errors_exit_one(tmp_path, capsys):
    rc = run_cli("variance", "--config", str(tmp_path / "missing.json"))
    assert rc == 1
    assert "graphlim: error:" in capsys.readouterr().err

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc = run_cli("variance", "--config", str(bad))
    assert rc == 1
    assert "bad.json:1" in capsys.readouterr().err

    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"volume": 11}')
    rc = run_cli("variance", "--config", str(unknown))
    assert rc == 1
    assert "unknown config key" in capsys.readouterr().err

    mismatch = tmp_path / "mismatch.json"
    mismatch.write_text(
        '{"design": "deterministic", "kernel": {"kind": "step", "values": [[1.0]]}}'
    )
    rc = run_cli("variance", "--config", str(mismatch))
    assert rc == 1
    assert "half-graph" in capsys.readouterr().err


def test_runtime_failures_exit_two(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    rc = run_cli(
        "simulate",
        *SMALL,
        "--mc-samples",
        "500",
        "--no-figures",
        "--out-dir",
        str(blocker / "sub"),
    )
    assert rc == 2
    assert "graphlim: failed:" in capsys.readouterr().err
