"""Command line interface: subcommands, exit codes, file outputs."""

import subprocess
import sys

import pytest

from rpauth.cli import main
from rpauth.harness import CSV_HEADER, read_roc_csv


def run_cli(*argv):
    return main(list(argv))


def test_selftest_passes(capsys):
    assert run_cli("selftest") == 0
    out = capsys.readouterr().out
    assert "selftest: PASS" in out
    assert "marcum_q1" in out


def test_roc_writes_csv(tmp_path, capsys):
    out = tmp_path / "roc.csv"
    code = run_cli("roc", "--trials", "512", "--seed", "3", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 14  # header + default 13-point grid
    assert "wrote 13 points" in capsys.readouterr().out


def test_roc_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli("roc", "--trials", "512", "--out", str(a)) == 0
    assert run_cli("roc", "--trials", "512", "--out", str(b), "--workers", "4") == 0
    assert a.read_bytes() == b.read_bytes()


def test_roc_mode_and_csi_overrides(tmp_path):
    af, df = tmp_path / "af.csv", tmp_path / "df.csv"
    assert run_cli("roc", "--trials", "2048", "--out", str(af), "--mode", "af") == 0
    assert run_cli("roc", "--trials", "2048", "--out", str(df), "--mode", "df") == 0
    paf = read_roc_csv(af)
    pdf = read_roc_csv(df)
    # decode-and-forward strips the forwarded noise, so it detects better
    assert all(d.pd_emp >= a.pd_emp for a, d in zip(paf, pdf))

    stat = tmp_path / "stat.csv"
    assert run_cli("roc", "--trials", "2048", "--out", str(stat), "--csi", "stat") == 0
    pstat = read_roc_csv(stat)
    assert pstat[0].pfa_set == paf[0].pfa_set


def test_roc_snr_sweep(tmp_path):
    plan = tmp_path / "plan.toml"
    plan.write_text(
        "trials = 2048\npfa_grid = [0.1]\n"
        "snr_grid = [[1.0, 1.0], [10.0, 10.0], [100.0, 100.0]]\n"
    )
    out = tmp_path / "snr.csv"
    assert run_cli("roc", "--config", str(plan), "--sweep", "snr", "--out", str(out)) == 0
    pts = read_roc_csv(out)
    assert len(pts) == 3
    assert pts[0].pd_emp < pts[1].pd_emp < pts[2].pd_emp


def test_roc_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text("unknown_key = 1\n")
    assert run_cli("roc", "--config", str(bad)) == 2
    assert "error:" in capsys.readouterr().err
    assert run_cli("roc", "--config", str(tmp_path / "none.toml")) == 2


def test_roc_unwritable_out_exits_2(tmp_path):
    assert run_cli("roc", "--trials", "256", "--out",
                   str(tmp_path / "no_dir" / "x.csv")) == 2


def test_validate_passes(capsys):
    assert run_cli("validate", "--trials", "8000", "--seed", "7") == 0
    out = capsys.readouterr().out
    assert "validate: PASS" in out
    assert "false-alarm calibration" in out
    assert "marcum series vs quadrature" in out
    assert "note: af offline approximation" in out


def test_validate_rejects_tiny_trials(capsys):
    assert run_cli("validate", "--trials", "10") == 2
    assert "at least 1000" in capsys.readouterr().err


def test_pmd_reports_closed_forms(capsys):
    assert run_cli("pmd", "--mu-e", "1.0,1.0", "--pfa", "0.1") == 0
    out = capsys.readouterr().out
    assert "pmd_exact" in out and "df offline" in out and "af offline" in out


def test_pmd_rejects_malformed_complex():
    with pytest.raises(SystemExit) as err:
        run_cli("pmd", "--mu-e", "1.0")
    assert err.value.code == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as err:
        run_cli("frobnicate")
    assert err.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "roc.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "rpauth", "roc", "--trials", "256", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
