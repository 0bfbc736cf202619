"""Command-line interface: exit codes, report files, determinism."""

import json
import subprocess
import sys

from magflow import cli


def run_cli(*argv):
    return cli.main(list(argv))


def test_list_batteries_exits_clean(capsys):
    assert run_cli("list-batteries") == 0
    out = capsys.readouterr().out
    assert "structural" in out and "carleman" in out


def test_print_config_round_trips(capsys):
    assert run_cli("print-config") == 0
    out = capsys.readouterr().out
    assert "backend:" in out


def test_verify_structural_passes(tmp_path, capsys):
    code = run_cli("verify", "--battery", "structural",
                   "--output", str(tmp_path))
    assert code == 0
    data = json.loads((tmp_path / "verify.json").read_text())
    assert data["meta"]["command"] == "verify"
    assert all(row["passed"] for row in data["rows"])
    assert (tmp_path / "verify.csv").exists()
    assert (tmp_path / "manifest.json").exists()


def test_zero_sigma_is_a_config_error(capsys):
    code = run_cli("verify", "--battery", "weights", "--sigma", "0")
    assert code == 2
    err = capsys.readouterr().err
    assert "sigma" in err


def test_unknown_battery_is_a_config_error(capsys):
    assert run_cli("verify", "--battery", "no-such-battery") == 2


def test_spectrum_constant_kappa_lengths(tmp_path, capsys):
    code = run_cli("spectrum", "--backend", "bolza", "--kappa", "0.6",
                   "--classes", "1", "--output", str(tmp_path))
    assert code == 0
    import csv
    with open(tmp_path / "spectrum.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and abs(float(rows[0]["length"]) - 3.8214272987024951) < 1e-6


def test_reports_are_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        code = run_cli("verify", "--battery", "weights", "--seed", "7",
                       "--output", str(out))
        assert code == 0
    for name in ("verify.json", "verify.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "magflow.cli",
                           "list-batteries"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "structural" in proc.stdout
