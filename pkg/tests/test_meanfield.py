import numpy as np
import pytest

from qmk.errors import ValidationError
from qmk.linalg import kron
from qmk.meanfield import (EvolutionConfig, convergence_rate_check,
                           default_potential, evolve_hartree, evolve_nbody,
                           marginal, two_body_hamiltonian)
from qmk.oscillator import OscillatorRep, ground_state, pure_density
from qmk.phasespace import default_reference, measure


def test_default_potential_shape():
    pot = default_potential()
    ys = np.linspace(-8.0, 8.0, 41)
    vals = pot(ys)
    assert np.allclose(vals, np.sqrt(1.0 + ys ** 2) - 1.0, atol=1e-8)
    assert abs(pot(np.array([0.0]))[0]) < 1e-12
    assert np.allclose(pot(ys), pot(-ys), atol=1e-12)


def test_potential_interpolation_accuracy():
    pot = default_potential()
    rng = np.random.default_rng(41)
    ys = rng.uniform(-20.0, 20.0, size=200)
    assert np.max(np.abs(pot(ys) - (np.sqrt(1.0 + ys ** 2) - 1.0))) < 1e-6


def test_two_body_hamiltonian_symmetric():
    rep = OscillatorRep(1.0, 6)
    h = two_body_hamiltonian(rep, default_potential())
    n = rep.dim
    assert np.linalg.norm(h - h.conj().T) < 1e-10
    # swap symmetry of the two factors
    swap = np.zeros((n * n, n * n))
    for i in range(n):
        for j in range(n):
            swap[i * n + j, j * n + i] = 1.0
    assert np.linalg.norm(swap @ h @ swap - h) < 1e-10


def test_hartree_short_run_conserves():
    rep = OscillatorRep(1.0, 12)
    cfg = EvolutionConfig(dt=2e-3, t_final=0.05, hbar=1.0, n_basis=12)
    rho0 = pure_density(rep, ground_state(rep))
    traj = evolve_hartree(rho0, default_potential(), cfg)
    final = traj.states[-1].matrix
    assert abs(np.trace(final).real - 1.0) < 1e-12
    assert np.linalg.eigvalsh(final).min() > -1e-10
    assert len(traj.times) == len(traj.states)
    assert traj.times[-1] == pytest.approx(0.05, abs=1e-9)


def test_nbody_short_run_conserves():
    rep = OscillatorRep(1.0, 8)
    cfg = EvolutionConfig(dt=2e-3, t_final=0.05, hbar=1.0, n_basis=8)
    rho0 = pure_density(rep, ground_state(rep))
    rho2 = pure_density(OscillatorRep(1.0, 8, d=2),
                        np.kron(ground_state(rep), ground_state(rep)))
    traj = evolve_nbody(rho2, default_potential(), cfg)
    final = traj.states[-1].matrix
    assert abs(np.trace(final).real - 1.0) < 1e-12
    assert abs(np.trace(final @ final).real - 1.0) < 1e-9


def test_marginal_of_product_state():
    rep = OscillatorRep(1.0, 6)
    rep2 = OscillatorRep(1.0, 6, d=2)
    from qmk.testkit import random_density
    a = random_density(6, rank=2, seed=42, basis_tag=rep.basis_tag)
    b = random_density(6, rank=2, seed=43, basis_tag=rep.basis_tag)
    from qmk.linalg import DensityOperator
    rho2 = DensityOperator(kron(a.matrix, b.matrix), rep2.basis_tag)
    m = marginal(rho2, rep2, keep=1)
    assert np.linalg.norm(m.matrix - a.matrix) < 1e-12


def test_stability_guard_rejects_huge_steps():
    rep = OscillatorRep(1.0, 12)
    cfg = EvolutionConfig(dt=0.5, t_final=1.0, hbar=1.0, n_basis=12)
    rho0 = pure_density(rep, ground_state(rep))
    with pytest.raises(ValidationError):
        evolve_hartree(rho0, default_potential(), cfg)


def test_rate_check_rows_hold_on_short_window():
    cfg = EvolutionConfig(dt=2e-3, t_final=0.1, hbar=1.0, n_basis=16)
    gauss = default_reference(OscillatorRep(1.0, 16))
    rows = convergence_rate_check(measure([[1.0, 0.5, 0.0]]), gauss, gauss,
                                  default_potential(), cfg, t_list=[0.0, 0.1])
    assert len(rows) == 2
    assert rows[0].lhs == pytest.approx(0.0, abs=1e-10)
    for r in rows:
        assert r.lhs <= r.rhs
        assert r.slack == pytest.approx(r.rhs - r.lhs, abs=1e-12)
