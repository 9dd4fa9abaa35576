import numpy as np
import pytest

from qmk.errors import ResolutionError, TruncationError, ValidationError
from qmk.oscillator import (OscillatorRep, coherent_state, fock_state,
                            ground_state, pure_density)
from qmk.phasespace import (PhaseSpaceGrid, check_resolution_identity,
                            default_grid, default_reference, husimi, measure,
                            toeplitz_quantize, wigner, wigner_pairing)
from qmk.testkit import quadrature_moment, random_density


def test_grid_validation():
    with pytest.raises(ValidationError):
        PhaseSpaceGrid(6.0, 6.0, 100, 128)
    with pytest.raises(ValidationError):
        PhaseSpaceGrid(-1.0, 6.0)
    g = PhaseSpaceGrid(6.0, 6.0, 64, 64)
    assert g.xs[32] == 0.0
    assert abs(g.cell - (12.0 / 64) ** 2) < 1e-15


def test_wigner_ground_state_gaussian():
    rep = OscillatorRep(1.0, 16)
    k = pure_density(rep, ground_state(rep))
    f = wigner(k, rep, default_grid(rep))
    assert abs(f.mass - 1.0) < 1e-6
    assert f.values.min() > -1e-12
    # peak value of the normalized Gaussian is 1 / (pi lam)
    peak = f.values.max()
    assert abs(peak - 1.0 / np.pi) < 1e-3


def test_wigner_fock1_negative_at_origin():
    rep = OscillatorRep(1.0, 16)
    k = pure_density(rep, fock_state(rep, 1))
    g = default_grid(rep)
    f = wigner(k, rep, g)
    center = f.values[g.n_x // 2, g.n_xi // 2]
    assert center < -0.1
    assert abs(f.mass - 1.0) < 1e-6


def test_wigner_pairing_matches_trace_product():
    rep = OscillatorRep(1.0, 8)
    g = default_grid(rep)
    for i in range(4):
        ka = random_density(8, seed=50 + 2 * i, basis_tag=rep.basis_tag)
        kb = random_density(8, seed=51 + 2 * i, basis_tag=rep.basis_tag)
        lhs = wigner_pairing(wigner(ka, rep, g), wigner(kb, rep, g), rep.lam)
        rhs = float(np.real(np.trace(ka.matrix @ kb.matrix)))
        assert abs(lhs - rhs) < 1e-6


def test_wigner_resolution_gate():
    rep = OscillatorRep(1.0, 8)
    coarse = PhaseSpaceGrid(6.0, 6.0, 16, 16)
    k = pure_density(rep, ground_state(rep))
    with pytest.raises(ResolutionError):
        wigner(k, rep, coarse)


def test_husimi_routes_agree_on_contained_grid():
    rep = OscillatorRep(1.0, 16)
    from qmk.linalg import DensityOperator
    m = (0.6 * np.outer(fock_state(rep, 0), fock_state(rep, 0))
         + 0.4 * np.outer(fock_state(rep, 2), fock_state(rep, 2)))
    k = DensityOperator(m.astype(complex), rep.basis_tag)
    g = PhaseSpaceGrid(4.0, 4.0, 64, 64)
    a = husimi(k, rep, g, method="convolution")
    b = husimi(k, rep, g, method="trace")
    assert np.max(np.abs(a.values - b.values)) < 1e-5


def test_husimi_trace_route_guards_wide_grids():
    rep = OscillatorRep(1.0, 8)
    k = pure_density(rep, ground_state(rep))
    wide = PhaseSpaceGrid(10.0, 10.0, 128, 128)
    with pytest.raises(TruncationError):
        husimi(k, rep, wide, method="trace")
    # the convolution route has no such ceiling
    f = husimi(k, rep, wide, method="convolution")
    assert f.values.min() >= -1e-10


def test_husimi_mass_and_moments():
    rep = OscillatorRep(1.0, 16)
    k = pure_density(rep, coherent_state(rep, 0.8, -0.4))
    f = husimi(k, rep, default_grid(rep))
    assert abs(f.mass - 1.0) < 1e-6
    assert abs(quadrature_moment(f, fx=1) - 0.8) < 1e-5
    assert abs(quadrature_moment(f, fxi=1) + 0.4) < 1e-5


def test_measure_validation():
    with pytest.raises(ValidationError):
        measure([[0.5, 0.0, 0.0], [-0.5, 1.0, 0.0]])
    mu = measure([[0.25, 0.0, 0.0], [0.75, 1.0, -1.0]])
    assert abs(mu.total - 1.0) < 1e-15
    assert mu.points.shape == (2, 2)


def test_toeplitz_quantize_density_and_single_atom():
    rep = OscillatorRep(1.0, 20)
    ref = default_reference(rep)
    mu = measure([[1.0, 0.6, -0.3]])
    k = toeplitz_quantize(rep, ref, mu)
    assert abs(np.trace(k.matrix).real - 1.0) < 1e-12
    assert np.linalg.eigvalsh(k.matrix).min() >= -1e-10
    # single atom at (q, p) is the displaced reference
    target = pure_density(rep, coherent_state(rep, 0.6, -0.3))
    assert np.linalg.norm(k.matrix - target.matrix) < 1e-6


def test_toeplitz_quantize_mixture_purity():
    rep = OscillatorRep(1.0, 16)
    mu = measure([[0.5, 1.0, 0.0], [0.5, -1.0, 0.0]])
    k = toeplitz_quantize(rep, default_reference(rep), mu)
    pur = float(np.real(np.trace(k.matrix @ k.matrix)))
    assert 0.45 < pur < 0.75


def test_resolution_identity_converges():
    dev = check_resolution_identity(OscillatorRep(1.0, 24), n_quad=32)
    assert dev < 0.02
