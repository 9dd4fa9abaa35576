import numpy as np
import pytest

from qmk.errors import TruncationError, ValidationError
from qmk.oscillator import (OscillatorRep, coherent_state, cost_operator,
                            displace_density, fock_state, ground_state,
                            momentum_operator, position_operator, pure_density,
                            translated_scaled_density, weyl_translate)
from qmk.quantum_ot import first_moments


def test_rep_validation():
    with pytest.raises(ValidationError):
        OscillatorRep(-1.0, 8)
    with pytest.raises(ValidationError):
        OscillatorRep(1.0, 3)
    with pytest.raises(ValidationError):
        OscillatorRep(1.0, 24, d=2)
    assert OscillatorRep(2.0, 8).dim == 8
    assert OscillatorRep(1.0, 5, d=2).dim == 25


def test_canonical_commutator_interior():
    """[X, P] = i lam I away from the truncation corner."""
    for lam in (1.0, 0.5):
        rep = OscillatorRep(lam, 20)
        x, p = position_operator(rep), momentum_operator(rep)
        comm = x @ p - p @ x
        block = comm[:12, :12]
        assert np.linalg.norm(block - 1j * lam * np.eye(12)) < 1e-12


def test_fock_states_orthonormal():
    rep = OscillatorRep(1.0, 10)
    vecs = [fock_state(rep, n) for n in range(10)]
    g = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.linalg.norm(g - np.eye(10)) < 1e-12
    assert np.linalg.norm(vecs[0] - ground_state(rep)) < 1e-15


def test_number_expectation_of_cost():
    """Paired ground states sit exactly at the additive constant 2 d lam."""
    for lam in (1.0, 0.25):
        rep = OscillatorRep(lam, 16)
        c = cost_operator(rep)
        gg = np.kron(ground_state(rep), ground_state(rep))
        assert np.linalg.norm(c - c.conj().T) < 1e-12
        assert np.linalg.eigvalsh(c).min() >= 2.0 * lam - 1e-8
        assert abs(np.vdot(gg, c @ gg).real - 2.0 * lam) < 1e-10


def test_coherent_state_moments():
    rep = OscillatorRep(1.0, 24)
    for q, p in ((0.7, -0.3), (-1.0, 0.5)):
        k = pure_density(rep, coherent_state(rep, q, p))
        m = first_moments(k, rep)
        assert abs(m.mean_position[0] - q) < 1e-8
        assert abs(m.mean_momentum[0] - p) < 1e-8


def test_weyl_translate_unitary_and_composition():
    rep = OscillatorRep(1.0, 24)
    u = weyl_translate(rep, 0.6, -0.4)
    assert np.linalg.norm(u.conj().T @ u - np.eye(rep.dim)) < 1e-12
    # inverse displacement undoes the first on well-contained states
    v = weyl_translate(rep, -0.6, 0.4)
    g = ground_state(rep)
    assert np.linalg.norm(v @ (u @ g) - g) < 1e-6


def test_displace_density_moves_moments():
    rep = OscillatorRep(1.0, 24)
    k = pure_density(rep, fock_state(rep, 1))
    kd = displace_density(rep, k, 0.8, -0.2)
    m = first_moments(kd, rep)
    assert abs(m.mean_position[0] - 0.8) < 1e-7
    assert abs(m.mean_momentum[0] + 0.2) < 1e-7


def test_translated_scaled_density_moments():
    """Scale-1 moments ride along scaled by sqrt(lam), plus the shift."""
    rep1 = OscillatorRep(1.0, 16)
    base = displace_density(rep1, pure_density(rep1, ground_state(rep1)), 0.5, 0.0)
    rep = OscillatorRep(0.25, 16)
    k = translated_scaled_density(rep, base, 0.3, -0.1)
    m = first_moments(k, rep)
    assert abs(m.mean_position[0] - (0.3 + 0.5 * np.sqrt(0.25))) < 1e-6
    assert abs(m.mean_momentum[0] + 0.1) < 1e-6


def test_oversized_displacement_rejected():
    rep = OscillatorRep(1.0, 8)
    with pytest.raises(TruncationError):
        coherent_state(rep, 6.0, 0.0)


def test_trace_preserved_by_displacement():
    rep = OscillatorRep(1.0, 20)
    k = pure_density(rep, ground_state(rep))
    kd = displace_density(rep, k, 1.0, 1.0)
    assert abs(np.trace(kd.matrix).real - 1.0) < 1e-12
    assert np.linalg.eigvalsh(kd.matrix).min() >= -1e-12
