import json
import os
import subprocess
import sys

import numpy as np
import pytest

BASE = [sys.executable, "-m", "qmk.cli"]


def run_cli(*args, cwd=None):
    return subprocess.run(BASE + list(args), capture_output=True, text=True,
                          cwd=cwd)


def test_solve_coherent_pair_json():
    out = run_cli("solve", "--a", "coherent", "0", "0",
                  "--b", "coherent", "1", "0", "--lambda", "1")
    assert out.returncode == 0
    payload = json.loads(out.stdout)
    assert payload["value_sq"] == pytest.approx(3.0, abs=0.06)
    assert payload["lambda"] == 1.0
    assert set(payload) == {"value_sq", "lambda", "iterations",
                            "primal_residual", "dual_residual", "objective_gap"}
    # 17 significant digits, scientific notation
    assert "e+00" in out.stdout or "e-" in out.stdout


def test_solve_self_distance_floor_scales():
    out = run_cli("solve", "--a", "coherent", "0", "0",
                  "--b", "coherent", "0", "0", "--lambda", "0.25")
    assert out.returncode == 0
    assert json.loads(out.stdout)["value_sq"] == pytest.approx(0.5, abs=0.01)


def test_usage_errors_exit_64():
    assert run_cli("solve", "--a", "coherent", "0", "0",
                   "--b", "warped", "1").returncode == 64
    assert run_cli("verify", "definitely-not-a-suite").returncode == 64
    assert run_cli("frobnicate").returncode == 64
    assert run_cli("solve", "--a", "coherent", "0").returncode == 64


def test_validation_errors_exit_1(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1.0,0.0\n")  # 1 x 2 is not a square re,im layout... it is 1x1
    # a 1x1 kernel never matches the basis dimension
    out = run_cli("solve", "--a", "kernel-file", str(bad), "--b", "fock", "0")
    assert out.returncode == 1
    assert "kernel" in out.stderr

    out = run_cli("solve", "--a", "toeplitz", str(tmp_path / "missing.txt"),
                  "--b", "fock", "0")
    assert out.returncode == 1

    cfgfile = tmp_path / "bad.ini"
    cfgfile.write_text("[unknown]\nx = 1\n")
    out = run_cli("solve", "--a", "fock", "0", "--b", "fock", "0",
                  "--config", str(cfgfile))
    assert out.returncode == 1


def test_verify_report_format_and_out(tmp_path):
    target = tmp_path / "report.csv"
    out = run_cli("verify", "schatten-contrast", "--out", str(target))
    assert out.returncode == 0
    text = target.read_text()
    lines = text.strip().splitlines()
    assert lines[0] == "case,measured,target,tolerance,status"
    assert all(line.endswith(("PASS", "FAIL")) for line in lines[1:])
    assert all(line.split(",")[4] == "PASS" for line in lines[1:])
    assert not os.path.exists(str(target) + ".tmp")


def test_config_file_and_flag_precedence(tmp_path):
    cfgfile = tmp_path / "mk.ini"
    cfgfile.write_text("[rep]\nlambda = 0.25\nn_basis = 12\n")
    out = run_cli("solve", "--a", "coherent", "0", "0", "--b", "coherent",
                  "0", "0", "--config", str(cfgfile))
    assert json.loads(out.stdout)["lambda"] == 0.25
    out = run_cli("solve", "--a", "coherent", "0", "0", "--b", "coherent",
                  "0", "0", "--config", str(cfgfile), "--lambda", "2")
    assert json.loads(out.stdout)["lambda"] == 2.0


def test_measure_file_states(tmp_path):
    mfile = tmp_path / "mu.txt"
    mfile.write_text("# two atoms\n0.5 0.8 0.0\n0.5 -0.8 0.0\n")
    out = run_cli("solve", "--a", "toeplitz", str(mfile),
                  "--b", "toeplitz", str(mfile), "--lambda", "1")
    assert out.returncode == 0
    val = json.loads(out.stdout)["value_sq"]
    # a self pair sits near the additive floor
    assert 1.8 < val < 2.6


def test_export_wigner_deterministic(tmp_path):
    f1, f2 = tmp_path / "w1.csv", tmp_path / "w2.csv"
    args = ("export", "wigner", "--a", "coherent", "0", "0", "--lambda", "1")
    assert run_cli(*args, "--out", str(f1)).returncode == 0
    assert run_cli(*args, "--out", str(f2)).returncode == 0
    b1, b2 = f1.read_bytes(), f2.read_bytes()
    assert b1 == b2
    data = np.loadtxt(str(f1), delimiter=",", skiprows=1)
    header = f1.read_text().splitlines()[0]
    assert header == "x,xi,value"
    cell = (12.0 / 128) ** 2
    assert data[:, 2].sum() * cell == pytest.approx(1.0, abs=1e-6)


def test_export_coupling_product_structure(tmp_path):
    target = tmp_path / "q.csv"
    out = run_cli("export", "coupling", "--a", "coherent", "0", "0",
                  "--b", "coherent", "1", "0", "--lambda", "1",
                  "--n-basis", "8", "--out", str(target))
    assert out.returncode == 0
    raw = np.loadtxt(str(target), delimiter=",", ndmin=2)
    n, m = raw.shape
    assert m == 2 * n
    q = raw[:, 0::2] + 1j * raw[:, 1::2]
    assert np.trace(q).real == pytest.approx(1.0, abs=1e-8)
    w = np.linalg.eigvalsh(q)
    assert w[-1] == pytest.approx(1.0, abs=1e-6)  # a pure pair couples as a product


def test_export_plan(tmp_path):
    fa, fb = tmp_path / "a.txt", tmp_path / "b.txt"
    fa.write_text("0.6 0.0 0.0\n0.4 1.0 0.0\n")
    fb.write_text("1.0 0.0 0.0\n")
    target = tmp_path / "plan.csv"
    assert run_cli("export", "plan", "--a", "toeplitz", str(fa),
                   "--b", "toeplitz", str(fb), "--out", str(target)).returncode == 0
    lines = target.read_text().strip().splitlines()
    assert lines[0] == "i,j,mass"
    mass = sum(float(line.split(",")[2]) for line in lines[1:])
    assert mass == pytest.approx(1.0, abs=1e-9)


def test_export_requires_out():
    out = run_cli("export", "wigner", "--a", "coherent", "0", "0")
    assert out.returncode == 64


def test_kernel_file_round_trip(tmp_path):
    """An exported coupling is itself a readable kernel file."""
    target = tmp_path / "q.csv"
    run_cli("export", "coupling", "--a", "fock", "0", "--b", "fock", "0",
            "--lambda", "1", "--n-basis", "4", "--out", str(target))
    # 16 x 16 doubled matrix: read back at the matching basis size
    out = run_cli("solve", "--a", "kernel-file", str(target),
                  "--b", "fock", "0", "--n-basis", "16")
    assert out.returncode == 0
    assert json.loads(out.stdout)["value_sq"] > 0
