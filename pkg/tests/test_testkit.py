import numpy as np
import pytest

from qmk.errors import ValidationError
from qmk.oscillator import OscillatorRep, cost_operator
from qmk.phasespace import measure
from qmk.classical_ot import w2_bruteforce
from qmk.testkit import (brute_force_sdp, quadrature_moment, random_density,
                         transport_lp_on_spectra)


def test_random_density_contract():
    k = random_density(6, rank=2, seed=5)
    w = np.linalg.eigvalsh(k.matrix)
    assert abs(np.trace(k.matrix).real - 1.0) < 1e-12
    assert w.min() > -1e-14
    assert np.sum(w > 1e-12) == 2

    full = random_density(6, seed=5)
    assert np.linalg.eigvalsh(full.matrix).min() > 0

    again = random_density(6, rank=2, seed=5)
    assert np.array_equal(k.matrix, again.matrix)
    other = random_density(6, rank=2, seed=6)
    assert not np.array_equal(k.matrix, other.matrix)


def test_random_density_rank_validation():
    with pytest.raises(ValidationError):
        random_density(4, rank=5, seed=0)


def test_brute_force_sdp_on_commuting_inputs():
    """Diagonal marginals with diagonal cost reduce to a classical LP."""
    rng = np.random.default_rng(9)
    wa = rng.uniform(0.2, 1.0, size=3)
    wa /= wa.sum()
    wb = rng.uniform(0.2, 1.0, size=3)
    wb /= wb.sum()
    xs = np.array([-1.0, 0.0, 1.5])
    cost = (xs[:, None] - xs[None, :]) ** 2
    val, gap = brute_force_sdp(np.diag(wa).astype(complex),
                               np.diag(wb).astype(complex),
                               np.diag(cost.ravel()).astype(complex))
    assert gap < 1e-8
    lp = transport_lp_on_spectra(wa, wb, cost.ravel())
    # a diagonal cost decouples the off-diagonal coupling blocks, so the
    # barrier optimum and the classical LP coincide
    assert abs(val - lp) < 1e-6


def test_brute_force_sdp_rejects_large_problems():
    a = np.eye(4, dtype=complex) / 4.0
    with pytest.raises(ValidationError):
        brute_force_sdp(a, a, np.eye(16, dtype=complex))


def test_transport_lp_on_spectra_analytic():
    wa = np.array([0.5, 0.5])
    wb = np.array([1.0])
    cost = np.array([[1.0], [4.0]])
    val = transport_lp_on_spectra(wa, wb, cost.ravel())
    assert val == pytest.approx(0.5 * 1.0 + 0.5 * 4.0, abs=1e-9)
    mu = measure([[0.5, 1.0, 0.0], [0.5, -2.0, 0.0]])
    nu = measure([[0.5, 0.0, 0.0], [0.5, 0.0, 0.0]])
    assert val == pytest.approx(w2_bruteforce(mu, nu), abs=1e-9)


def test_quadrature_moment_on_synthetic_field():
    from qmk.phasespace import PhaseSpaceField, PhaseSpaceGrid
    g = PhaseSpaceGrid(8.0, 8.0, 128, 128)
    xs, xis = np.meshgrid(g.xs, g.xis, indexing="ij")
    vals = np.exp(-((xs - 1.0) ** 2 + xis ** 2) / 2.0) / (2.0 * np.pi)
    f = PhaseSpaceField(g, vals)
    assert quadrature_moment(f) == pytest.approx(1.0, abs=1e-6)
    assert quadrature_moment(f, fx=1) == pytest.approx(1.0, abs=1e-6)
    assert quadrature_moment(f, fx=2) == pytest.approx(2.0, abs=1e-6)
    assert quadrature_moment(f, fxi=2) == pytest.approx(1.0, abs=1e-6)
