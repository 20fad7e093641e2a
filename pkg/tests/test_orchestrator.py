"""
Command-line surface: exit codes, headers and the files each subcommand writes
"""

import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from src import __version__, resolvent
from src.asymptotics import asymptote_coeffs
from src.config_loader import ConfigLoader
from src.models import AsymptoteMode, AsymptoteReport
from src.orchestrator import cli, dispatch
from src.report_generator import ReportGenerator


@pytest.fixture
def runner():
    return CliRunner()


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_hydrogen_table_check(runner, tmp_path):
    result = runner.invoke(cli, ["hydrogen-table", "--levels", "1,10,50", "--check", "--output-dir", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "Reference check: PASS" in result.output
    rows = read_csv(tmp_path / "hydrogen_table.csv")
    assert [int(r["N"]) for r in rows] == [1, 10, 50]
    assert list(rows[0]) == ["N", "ratio", "t_N_s", "t_ep_s", "A_ep_sq"]
    assert float(rows[1]["ratio"]) == pytest.approx(1.28, abs=0.01)
    assert float(rows[2]["t_N_s"]) == pytest.approx(3.18e-5, rel=0.01)
    assert float(rows[2]["t_ep_s"]) == pytest.approx(4.59e-3, rel=0.05)


def test_maximize_single_level(runner, single_level_config, tmp_path):
    result = runner.invoke(cli, ["maximize", "--model", str(single_level_config)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "out" / "maximize.json").read_text())
    (re_part, im_part), = payload["state"]
    assert np.hypot(re_part, im_part) == pytest.approx(1.0)


def test_maximize_with_sweep(runner, toy_config, tmp_path):
    result = runner.invoke(cli, ["maximize", "--model", str(toy_config), "--sweep", "200"])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "out" / "maximize.json").read_text())
    assert payload["sweep"]["violations"] == 0
    assert payload["sweep"]["seed"] == 20240501


def test_asymptote_and_orthogonal(runner, toy_config, tmp_path):
    assert runner.invoke(cli, ["asymptote", "--model", str(toy_config), "--sla"]).exit_code == 0
    report = json.loads((tmp_path / "out" / "asymptote.json").read_text())
    assert report["p"] == 0.5
    assert report["mode"] == "exact"
    assert len(report["f"]) == 2
    assert "relative_deviation" in report["sla"]

    assert runner.invoke(cli, ["orthogonal", "--model", str(toy_config)]).exit_code == 0
    complement = json.loads((tmp_path / "out" / "orthogonal.json").read_text())
    assert len(complement["states"]) == 1
    assert complement["coefficients"][0] < 1e-20

def test_asymptote_file_reads_back(runner, toy_config, tmp_path):
    assert runner.invoke(cli, ["asymptote", "--model", str(toy_config)]).exit_code == 0
    payload = ReportGenerator(tmp_path / "out").read_record("asymptote")
    loaded = AsymptoteReport.from_dict(payload)
    assert loaded.to_dict() == payload

    expected = asymptote_coeffs(ConfigLoader(str(toy_config)).load().model, AsymptoteMode.EXACT)
    assert loaded.p == expected.p
    assert loaded.lam == expected.lam
    assert loaded.mode is AsymptoteMode.EXACT
    assert loaded.chi_norm_sq == pytest.approx(expected.chi_norm_sq, rel=1e-15)
    np.testing.assert_allclose(loaded.f, expected.f, rtol=1e-15)
    np.testing.assert_allclose(loaded.maximizer, expected.maximizer, rtol=1e-15)
    assert loaded.t_ep is None


def test_run_tolerance_reaches_quadrature(runner, toy_config, tmp_path, monkeypatch):
    toy_config.write_text(toy_config.read_text().replace("format: csv", "format: csv\n  tolerance: 1.0e-6"))
    requested = []
    original = resolvent.nodes_per_panel

    def recording(tolerance=resolvent.DEFAULT_TOLERANCE):
        requested.append(tolerance)
        return original(tolerance)

    monkeypatch.setattr(resolvent, "nodes_per_panel", recording)
    for args in (
        ["asymptote", "--sla"],
        ["density", "--omega-log", "1e-2..10", "--points", "20"],
        ["survive", "--t-lin", "0..5", "--points", "3"],
        ["crossover", "--mode", "approximate"],
    ):
        result = runner.invoke(cli, args + ["--model", str(toy_config)])
        assert result.exit_code == 0, result.output
    assert requested
    assert set(requested) == {1e-6}



def test_crossover_both_modes(runner, toy_config, tmp_path):
    result = runner.invoke(cli, ["crossover", "--model", str(toy_config)])
    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "out" / "crossover.json").read_text())
    assert payload["full"]["t_ep"] > 0
    assert payload["approximate"]["t_ep"] > 0


def test_density_on_log_grid(runner, toy_config, tmp_path):
    result = runner.invoke(
        cli, ["density", "--model", str(toy_config), "--omega-log", "1e-3..10", "--points", "50", "--state", "level:1"]
    )
    assert result.exit_code == 0, result.output
    rows = read_csv(tmp_path / "out" / "density.csv")
    assert len(rows) == 50
    assert list(rows[0]) == ["omega", "density", "overlap_re", "overlap_im"]


def test_survive_is_deterministic(runner, toy_config, tmp_path):
    args = ["survive", "--model", str(toy_config), "--t-lin", "0..20", "--points", "11"]
    assert runner.invoke(cli, args).exit_code == 0
    first = (tmp_path / "out" / "survival.csv").read_bytes()
    assert runner.invoke(cli, args).exit_code == 0
    assert (tmp_path / "out" / "survival.csv").read_bytes() == first
    rows = read_csv(tmp_path / "out" / "survival.csv")
    assert float(rows[0]["A_re"]) == pytest.approx(1.0, abs=1e-3)


def test_survive_budget_exit_code(runner, toy_config, tmp_path):
    result = runner.invoke(cli, ["survive", "--model", str(toy_config), "--t-lin", "0..20", "--points", "5", "--budget", "1"])
    assert result.exit_code == 2
    assert (tmp_path / "out" / "survival.csv").exists()


def test_reproducibility_header(toy_config, capsys):
    assert dispatch(["orthogonal", "--model", str(toy_config)]) == 0
    err = capsys.readouterr().err
    assert f"# friedrichs {__version__} config_hash=" in err
    assert "seed=20240501" in err


def test_unknown_key_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("model:\n  lamda: 0.1\n")
    assert dispatch(["asymptote", "--model", str(path)]) == 1
    assert "model.lamda" in capsys.readouterr().err


def test_usage_error_exit_code(capsys):
    assert dispatch(["survive"]) == 1
    assert "doc/configuration.md" in capsys.readouterr().err
    assert dispatch(["no-such-command"]) == 1


def test_state_length_mismatch(toy_config):
    assert dispatch(["density", "--model", str(toy_config), "--state", "1,0,0"]) == 1


@pytest.mark.slow
def test_oracle_check_command(runner, toy_config, tmp_path):
    result = runner.invoke(cli, ["oracle-check", "--model", str(toy_config), "--omega-max", "60", "--points", "40"])
    assert result.exit_code == 0, result.output
    summary = json.loads((tmp_path / "out" / "oracle_summary.json").read_text())
    assert summary["matched"]
    assert summary["max_abs_deviation"] <= 1e-3
