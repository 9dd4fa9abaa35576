"""End-to-end checks of the package's headline claims.

Each test asserts one contract: closed-form distance values, the additive
floor, scale and translation covariance, cross-solver agreement, kernel
self-minimizers, separation above the floor, tensorization, the
phase-space transform identities, two-sided bounds, the norm-contrast
table, the two-particle mean-field inequality, and byte determinism of
the reports.  Expensive verification suites run once per session and are
shared across tests through the `suites` fixture.
"""

import subprocess
import sys

import numpy as np

from qmk.oscillator import OscillatorRep, cost_operator
from qmk.quantum_ot import SolverConfig, solve_mk
from qmk.testkit import brute_force_sdp, random_density
from qmk.verify import SURVEY_CFG, render_report, run_suite, suite_passed


def _by_case(rows):
    return {r.case: r for r in rows}


def test_gaussian_self_distance(suites):
    rows = _by_case(suites("displaced-coherent"))
    r = rows["lam100-self"]
    assert 1.96 <= r.measured <= 2.04
    assert r.passed
    assert suites.time_of("displaced-coherent") < 30.0


def test_displaced_coherent_formula(suites):
    rows = _by_case(suites("displaced-coherent"))
    assert 2.94 <= rows["lam100-shift-q1"].measured <= 3.06
    assert 5.88 <= rows["lam100-shift-p2"].measured <= 6.12
    assert suite_passed(suites("displaced-coherent"))


def test_distance_floor(suites):
    rows = suites("floor-2d")
    assert len(rows) == 20
    for r in rows:
        assert r.measured >= 2.0 - 1e-6
    assert suite_passed(rows)


def test_scaling_covariance(suites):
    rows = suites("scaling-law")
    assert len(rows) == 10  # 5 pairs at two scales
    assert suite_passed(rows)


def test_translation_covariance(suites):
    rows = _by_case(suites("translation-law"))
    assert len(rows) == 5
    assert "case-4-moving-ref" in rows  # reference pair with nonzero means
    assert suite_passed(suites("translation-law"))


def test_cross_solver_agreement():
    """Splitting solver vs an interior-point barrier on 20 compressed pairs."""
    rep = OscillatorRep(1.0, 8)
    cost = cost_operator(rep)
    cfg = SolverConfig()
    worst = 0.0
    for i in range(20):
        ka = random_density(8, rank=3, seed=7000 + 2 * i, basis_tag=rep.basis_tag)
        kb = random_density(8, rank=3, seed=7001 + 2 * i, basis_tag=rep.basis_tag)
        val = solve_mk(ka, kb, rep, cfg).value_sq

        wa, va = np.linalg.eigh(ka.matrix)
        wb, vb = np.linalg.eigh(kb.matrix)
        va, vb = va[:, wa > 1e-10], vb[:, wb > 1e-10]
        w = np.kron(va, vb)
        bval, gap = brute_force_sdp(va.conj().T @ ka.matrix @ va,
                                    vb.conj().T @ kb.matrix @ vb,
                                    w.conj().T @ cost @ w)
        assert gap < 1e-8
        worst = max(worst, abs(val - bval))
    assert worst < 1e-5


def test_kernel_self_minimizers(suites):
    rows = suites("self-minimizer")
    assert len(rows) == 2
    for r in rows:
        assert 1.96 <= r.measured <= 2.04
    assert suite_passed(rows)


def test_separation_above_floor(suites):
    """Frobenius-separated pairs sit strictly above the additive floor."""
    rep = OscillatorRep(1.0, 8)
    rows = suites("floor-2d")
    separated = []
    for i, r in enumerate(rows):
        ka = random_density(8, seed=2 * i, basis_tag=rep.basis_tag)
        kb = random_density(8, seed=2 * i + 1, basis_tag=rep.basis_tag)
        if np.linalg.norm(ka.matrix - kb.matrix) >= 0.1:
            separated.append(r.measured)
    assert len(separated) >= 10
    floor = 2.0 + 10.0 * SURVEY_CFG.feas_tol
    for val in separated[:10]:
        assert val > floor


def test_tensorization(suites):
    rows = suites("tensorization")
    assert len(rows) == 3
    assert suite_passed(rows)


def test_phase_space_identities(suites):
    assert suite_passed(suites("wigner-props"))
    assert suite_passed(suites("husimi-positivity"))
    assert suite_passed(suites("resolution-identity"))


def test_sandwich_bounds(suites):
    rows = suites("sandwich")
    assert len(rows) == 30  # lower / quantized upper / product upper per case
    assert suite_passed(rows)


def test_schatten_contrast(suites):
    rows = _by_case(suites("schatten-contrast"))
    target = np.sqrt(2.0) * np.sqrt(1.0 - np.exp(-0.5))
    assert abs(rows["route-series"].measured - target) <= 1e-4
    assert abs(rows["route-matrix"].measured - target) <= 1e-4
    assert suite_passed(suites("schatten-contrast"))


def test_meanfield_inequality(suites):
    rows = _by_case(suites("meanfield-rate"))
    for tag in ("h100", "h050"):
        for t in ("t000", "t025", "t050"):
            r = rows[f"{tag}-rate-{t}"]
            assert r.measured <= r.target  # lhs never exceeds the envelope
        for part in ("nbody-dt-ratio", "hartree-dt-ratio"):
            assert 3.5 <= rows[f"{tag}-{part}"].measured <= 4.5
    assert suite_passed(suites("meanfield-rate"))


def test_report_determinism():
    for name in ("schatten-contrast", "resolution-identity"):
        first = render_report(run_suite(name, seed=0))
        second = render_report(run_suite(name, seed=0))
        assert first == second

    cmd = [sys.executable, "-m", "qmk.cli", "verify", "schatten-contrast"]
    out1 = subprocess.run(cmd, capture_output=True)
    out2 = subprocess.run(cmd, capture_output=True)
    assert out1.returncode == 0
    assert out1.stdout == out2.stdout
