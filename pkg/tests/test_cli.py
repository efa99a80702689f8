"""Command-line behavior: schemas, determinism, exit codes."""

import json
import subprocess
import sys

import pytest

import covbound as cb
from covbound import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# report schemas
# ---------------------------------------------------------------------------

def test_bound_report_schema(capsys):
    code, out, err = run_cli(capsys, "bound", "--band", "-0.3:0.3",
                             "--n", "3", "--tau", "1.5", "--step", "2e-3")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert set(doc) == {"bound", "coefficients", "omega", "duality_gap",
                        "diagnostics", "config"}
    assert len(doc["coefficients"]) == 7
    assert all(len(pair) == 2 for pair in doc["coefficients"])
    assert doc["bound"] > 0
    assert doc["config"]["merged_overlapping_bands"] is False
    assert doc["diagnostics"]["status"] in ("optimal", "max_iter")


def test_bound_integer_lag_is_zero(capsys):
    code, out, _ = run_cli(capsys, "bound", "--band", "-0.3:0.3",
                           "--n", "3", "--tau", "2", "--step", "2e-3")
    assert code == 0
    doc = json.loads(out)
    assert doc["bound"] <= 1e-8
    assert doc["omega"] is None


def test_overlapping_bands_merge_is_noted(capsys):
    code, out, _ = run_cli(capsys, "bound", "--band", "-0.3:0.3",
                           "--band", "0.1:0.2", "--n", "3", "--tau", "2",
                           "--step", "2e-3")
    assert code == 0
    cfg = json.loads(out)["config"]
    assert cfg["merged_overlapping_bands"] is True
    assert cfg["band_intervals"] == [[-0.3, 0.3]]
    assert cfg["band_intervals_input"] == [[-0.3, 0.3], [0.1, 0.2]]


def test_gap_report_fields(capsys):
    code, out, _ = run_cli(capsys, "gap", "--band", "-0.3:-0.1",
                           "--band", "0.05:0.3", "--n", "3", "--tau", "7",
                           "--step", "2e-3", "--phases", "24")
    assert code == 0
    doc = json.loads(out)
    assert doc["gap"] == pytest.approx(doc["bound"] - doc["exact"], abs=1e-12)
    assert doc["gap"] > 0


def test_exact_report_carries_witness(capsys):
    code, out, _ = run_cli(capsys, "exact", "--band", "-0.3:0.3",
                           "--n", "3", "--tau", "0.5", "--step", "4e-3",
                           "--phases", "8")
    assert code == 0
    doc = json.loads(out)
    assert doc["total_mass"] == pytest.approx(2.0, abs=1e-7)
    assert abs(complex(doc["phi0"][0], doc["phi0"][1])) == pytest.approx(1.0)
    assert doc["mu_atoms"] and doc["nu_atoms"]


def test_diagnose_reports_all_pass(capsys):
    code, out, _ = run_cli(capsys, "diagnose", "--band", "-0.3:0.3",
                           "--n", "3", "--tau", "1.5", "--step", "2e-3")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert {c["status"] for c in doc["checks"]} == {"pass"}


# ---------------------------------------------------------------------------
# sweep output
# ---------------------------------------------------------------------------

def test_sweep_csv_schema(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--band", "-0.3:0.3", "--n", "3",
                           "--tau-range", "0:3", "--points", "4",
                           "--step", "2e-3")
    assert code == 0
    lines = out.splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "tau,bound"
    assert len(body) == 5
    assert any("grid_step" in c for c in comments)
    # integer lags serialize as exact zeros
    assert body[1] == "0,0"


def test_sweep_csv_with_exact_columns(tmp_path, capsys):
    target = tmp_path / "curve.csv"
    code, out, _ = run_cli(capsys, "sweep", "--band", "-0.3:0.3", "--n", "3",
                           "--tau-range", "0.5:1.5", "--points", "2",
                           "--step", "4e-3", "--exact", "--phases", "8",
                           "--output", str(target))
    assert code == 0 and out == ""
    lines = target.read_text().splitlines()
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "tau,bound,exact,gap"


def test_sweep_json_holds_aligned_arrays(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--band", "-0.3:0.3", "--n", "3",
                           "--tau-range", "0:2", "--points", "3",
                           "--step", "4e-3", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["tau"]) == len(doc["bound"]) == 3
    assert doc["exact"] is None and doc["gap"] is None


def test_sweep_output_is_byte_identical(tmp_path, capsys):
    args = ("sweep", "--band", "-0.3:0.3", "--n", "3",
            "--tau-range", "0:3", "--points", "4", "--step", "2e-3")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(capsys, *args, "--output", str(a))[0] == 0
    assert run_cli(capsys, *args, "--output", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# configuration handling
# ---------------------------------------------------------------------------

def test_config_file_supplies_values_and_flags_override(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({
        "band_intervals": [[-0.3, 0.3]], "n": 3, "tau": 1.5, "step": 4e-3,
    }))
    code, out, _ = run_cli(capsys, "bound", "--config", str(cfgfile))
    assert code == 0
    assert json.loads(out)["config"]["tau"] == 1.5
    code, out, _ = run_cli(capsys, "bound", "--config", str(cfgfile),
                           "--tau", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["tau"] == 2.0 and doc["bound"] <= 1e-8


@pytest.mark.parametrize("argv,fragment", [
    (("bound", "--band", "oops", "--n", "3", "--tau", "1"), "lo:hi"),
    (("bound", "--band", "-0.3:0.3", "--tau", "1"), "--n"),
    (("bound", "--band", "0.3:-0.3", "--n", "3", "--tau", "1"), "lo > hi"),
    (("bound", "--band", "-0.3:0.3", "--n", "3"), "--tau"),
    (("sweep", "--band", "-0.3:0.3", "--n", "3"), "--tau-range"),
    (("bound", "--band", "-0.3:0.3", "--n", "3", "--tau", "1",
      "--step", "-1"), "step"),
])
def test_config_errors_exit_2(capsys, argv, fragment):
    code, out, err = run_cli(capsys, *argv)
    assert code == 2
    assert fragment in json.loads(err)["error"]["message"]


def test_unknown_config_key_rejected(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"banana": 1}))
    code, _, err = run_cli(capsys, "bound", "--config", str(cfgfile),
                           "--band", "-0.3:0.3", "--n", "3", "--tau", "1")
    assert code == 2
    assert "banana" in err


def test_non_sweep_commands_are_json_only(tmp_path, capsys):
    cfgfile = tmp_path / "run.json"
    cfgfile.write_text(json.dumps({"format": "csv"}))
    code, _, err = run_cli(capsys, "bound", "--config", str(cfgfile),
                           "--band", "-0.3:0.3", "--n", "3", "--tau", "1")
    assert code == 2
    assert "JSON-only" in err


def test_solver_failure_exits_3(monkeypatch, capsys):
    def explode(spec, grid, cfg=None):
        raise cb.Infeasible("synthetic failure")

    monkeypatch.setattr(cli, "upper_bound", explode)
    code, _, err = run_cli(capsys, "bound", "--band", "-0.3:0.3",
                           "--n", "3", "--tau", "1.5")
    assert code == 3
    assert json.loads(err)["error"]["kind"] == "solver"


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "covbound", "bound", "--band", "-0.3:0.3",
         "--n", "3", "--tau", "2", "--step", "4e-3"],
        capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["bound"] <= 1e-8
