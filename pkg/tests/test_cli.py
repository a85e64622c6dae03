import subprocess
import sys

import pytest

from conftest import DATA
from lexnet.cli import main

SMALL = ["--topology", "torus", "--width", "3", "--height", "3", "--length", "4", "--alphabet", "4"]


def run_cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "lexnet.cli", *args], capture_output=True, text=True, env=env)


def test_epsilon_out_of_range_is_usage_error():
    r = run_cli("sweep", "--epsilon", "1.5")
    assert r.returncode == 2
    assert "[0, 1]" in r.stderr


def test_simulate_prints_consensus(capsys):
    assert main(["simulate", *SMALL, "--seed", "1"]) == 0
    line = capsys.readouterr().out.strip()
    assert "converged=true" in line and "final_energy=0.0" in line
    word = line.rsplit("consensus=", 1)[1]
    assert len(word) == 4 and set(word) <= set("abcd")


def test_simulate_writes_series_and_snapshot(tmp_path, capsys):
    out, snap = tmp_path / "s.csv", tmp_path / "snap.txt"
    assert main(["simulate", *SMALL, "--out", str(out), "--snapshot", str(snap), "--stride", "1"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# ") and lines[1].startswith("run_id,seed,epsilon_num")
    assert len(snap.read_text().splitlines()) == 9


def test_sweep_output_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--preset", "smoke", "--workers", "1", "--out", str(a)]) == 0
    assert main(["sweep", "--preset", "smoke", "--workers", "2", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[1:] == (DATA / "golden_smoke_sweep.csv").read_text().splitlines()[1:]


def test_help_lists_flags_and_presets():
    r = run_cli("sweep", "--help")
    assert r.returncode == 0
    for flag in ("--epsilon", "--length", "--alphabet", "--trials", "--workers", "--seed", "--format"):
        assert flag in r.stdout
    for name in ("smoke", "fig2-small", "paper-fig2"):
        assert name in r.stdout


@pytest.mark.parametrize("name", ["selfloop", "duplicate", "disconnected"])
def test_bad_edge_lists_are_usage_errors(name, capsys):
    assert main(["simulate", "--edges", str(DATA / f"{name}.txt")]) == 2
    assert "error" in capsys.readouterr().err


def test_missing_edges_file(capsys):
    assert main(["simulate", "--topology", "edgelist", "--edges", "/nonexistent/g.txt"]) == 2
    assert "/nonexistent/g.txt" in capsys.readouterr().err


def test_unwritable_output_is_runtime_error(capsys):
    assert main(["sweep", "--preset", "smoke", "--workers", "1", "--out", "/nonexistent/dir/x.csv"]) == 1
    assert "/nonexistent/dir/x.csv" in capsys.readouterr().err


def test_bad_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("LEXNET_SEED", "-3")
    assert main(["simulate", *SMALL]) == 2


def test_convergence_command(capsys):
    assert main(["convergence", "--family", "torus", "--sizes", "3,4", "--workers", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].startswith("graph,n,p,schedule")
    assert len(lines) == 2 + 4


def test_trajectory_command(capsys):
    assert main(["trajectory", "--preset", "smoke", "--epsilon", "0,1", "--length", "4", "--trials", "2",
                 "--workers", "1", "--format", "json"]) == 0
    assert '"epsilon": "1/1"' in capsys.readouterr().out


def test_verify_command(capsys):
    assert main(["verify", "--cases", "200", "--runs", "3"]) == 0
    out = capsys.readouterr().out
    assert "PASS partition" in out and "FAIL" not in out
