"""Miniature mean-field demonstration: one-body self-consistent dynamics
versus the two-particle flow, compared through smoothed phase-space fields.

Everything runs in the scaled oscillator basis (default 16 levels per
particle).  Kinetic and multiplication operators are projected by
Gauss-Hermite quadrature, which is exact on the basis polynomials, so
each time step is a genuine unitary conjugation: trace, positivity and
Hermiticity are preserved to machine precision by construction.

The one-body equation refreshes its mean-field potential once per split
step (midpoint value after the half kinetic step), giving second-order
accuracy that the step-halving oracle verifies.  The two-particle
Hamiltonian is time-independent, so its propagator comes from a single
eigendecomposition and is exact in time; an optional split-step mode
exists solely to cross-check that propagator at finite step size.

The rate check quantizes a discrete initial measure, runs both flows,
and compares the smoothed one-body fields by the classical transport
distance against the closed-form envelope built from the potential's
supplied Lipschitz data and the reference self-distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .classical_ot import field_to_measure, w2
from .errors import ValidationError
from .linalg import DensityOperator, kron, partial_trace
from .oscillator import OscillatorRep, basis_values, momentum_operator
from .phasespace import (DiscreteMeasure, PhaseSpaceGrid, default_grid, husimi,
                         toeplitz_quantize)
from .quantum_ot import SolverConfig, _rep_from_tag, solve_mk


@dataclass(frozen=True)
class PairPotential:
    """Even interaction potential sampled on a symmetric grid.

    The Lipschitz data of the gradient is supplied, not estimated: it is
    a hypothesis about the true function, and grid samples cannot attest
    to it.
    """

    ys: np.ndarray
    values: np.ndarray
    lip_grad: float
    grad_sup: float

    def __post_init__(self):
        ys, vals = np.asarray(self.ys, float), np.asarray(self.values, float)
        if ys.ndim != 1 or ys.shape != vals.shape or ys.size < 8:
            raise ValidationError("potential: need matching 1d sample arrays")
        if np.max(np.abs(ys + ys[::-1])) > 1e-12:
            raise ValidationError("potential: sample grid must be symmetric")
        if np.max(np.abs(vals - vals[::-1])) > 1e-12:
            raise ValidationError("potential: values must be even")
        if not (np.isfinite(self.lip_grad) and np.isfinite(self.grad_sup)
                and self.lip_grad > 0 and self.grad_sup > 0):
            raise ValidationError("potential: positive finite Lipschitz data required")
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "values", vals)

    def interpolator(self) -> CubicSpline:
        return CubicSpline(self.ys, self.values)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, float)
        if np.max(np.abs(y)) > self.ys[-1]:
            raise ValidationError("potential: evaluation outside the sampled range")
        return self.interpolator()(y)


def default_potential(half_width: float = 26.0, n: int = 2601) -> PairPotential:
    """sqrt(1 + y^2) - 1: gradient bounded by 1 with Lipschitz constant 1."""
    ys = np.linspace(-half_width, half_width, n)
    return PairPotential(ys, np.sqrt(1.0 + ys ** 2) - 1.0, lip_grad=1.0, grad_sup=1.0)


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    t_final: float
    hbar: float
    n_basis: int = 16

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0 or self.hbar <= 0 or self.n_basis < 4:
            raise ValidationError("evolution config: positive dt, t_final, hbar required")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list[DensityOperator]
    rep: OscillatorRep

    def at(self, t: float) -> tuple[float, DensityOperator]:
        """State at the stored time closest to t."""
        i = int(np.argmin(np.abs(self.times - t)))
        return float(self.times[i]), self.states[i]


def _quadrature(rep: OscillatorRep, n_quad: int | None = None):
    """(nodes, effective weights, basis table) for integrals against phi_m phi_n.

    Weights already carry the Gaussian removal and the scale Jacobian, so
    sum_i wbar_i f(x_i) phi_m(x_i) phi_n(x_i) integrates f phi_m phi_n
    exactly whenever f is polynomial of degree <= 2(n_quad - n_basis) + 1.
    """
    nq = n_quad or 2 * rep.n_basis + 32
    t, w = np.polynomial.hermite.hermgauss(nq)
    s = np.sqrt(rep.lam)
    wbar = np.exp(np.log(w) + t ** 2) * s
    return t * s, wbar, basis_values(rep, t * s)


def _kinetic(rep: OscillatorRep) -> np.ndarray:
    p = momentum_operator(rep)
    return 0.5 * (p @ p)


def _multiplication_operator(fvals: np.ndarray, wbar: np.ndarray,
                             btab: np.ndarray) -> np.ndarray:
    m = (btab * (wbar * fvals)[:, None]).T @ btab
    return 0.5 * (m + m.T)


def _stability_check(dt: float, hbar: float, h_norm: float) -> None:
    if dt > hbar / (10.0 * h_norm):
        raise ValidationError(
            f"dt {dt:.3e} exceeds the stability budget {hbar / (10.0 * h_norm):.3e}")


def _expm_factor(h: np.ndarray, dt: float, hbar: float) -> np.ndarray:
    ev, vec = np.linalg.eigh(h)
    return (vec * np.exp(-1j * dt * ev / hbar)) @ vec.conj().T


def hartree_energy(rho: np.ndarray, kin: np.ndarray, vmat_nodes: np.ndarray,
                   wbar: np.ndarray, btab: np.ndarray) -> float:
    """Kinetic expectation plus half the doubled interaction integral."""
    dens = np.real(np.einsum("im,mn,in->i", btab, rho, btab.conj(), optimize=True))
    mean = vmat_nodes @ (wbar * dens)
    pot = 0.5 * float((wbar * dens) @ mean)
    return float(np.real(np.einsum("ij,ji->", kin, rho))) + pot


def evolve_hartree(rho_in: DensityOperator, pot: PairPotential,
                   cfg: EvolutionConfig, n_quad: int | None = None) -> Trajectory:
    """Self-consistent one-body flow by symmetric kinetic/potential splitting.

    The mean-field multiplication operator is rebuilt once per step from
    the density after the half kinetic step; each factor is a unitary
    conjugation, so the state stays an exact density throughout.
    """
    rep = OscillatorRep(cfg.hbar, cfg.n_basis)
    if rho_in.basis_tag != rep.basis_tag:
        raise ValidationError("evolve_hartree: state does not match the config scale")
    xs, wbar, btab = _quadrature(rep, n_quad)
    vdiff = pot(xs[:, None] - xs[None, :])
    kin = _kinetic(rep)
    n_steps = max(1, int(np.ceil(cfg.t_final / cfg.dt - 1e-12)))
    dt = cfg.t_final / n_steps

    def mean_field(rho: np.ndarray) -> np.ndarray:
        dens = np.real(np.einsum("im,mn,in->i", btab, rho, btab.conj(), optimize=True))
        return _multiplication_operator(vdiff @ (wbar * dens), wbar, btab)

    h_norm = float(np.linalg.norm(kin, 2) + np.linalg.norm(mean_field(rho_in.matrix), 2))
    _stability_check(dt, cfg.hbar, h_norm)
    half_kin = _expm_factor(kin, 0.5 * dt, cfg.hbar)

    rho = rho_in.matrix.copy()
    times = [0.0]
    states = [rho_in]
    for k in range(n_steps):
        rho = half_kin @ rho @ half_kin.conj().T
        vop = mean_field(rho)
        rho = (u := _expm_factor(vop, dt, cfg.hbar)) @ rho @ u.conj().T
        rho = half_kin @ rho @ half_kin.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        times.append((k + 1) * dt)
        states.append(DensityOperator(rho, rep.basis_tag))
    return Trajectory(np.array(times), states, rep)


def _pair_rep(rep: OscillatorRep) -> OscillatorRep:
    return OscillatorRep(rep.lam, rep.n_basis, d=2)


def two_body_hamiltonian(rep: OscillatorRep, pot: PairPotential, n_particles: int = 2,
                         n_quad: int | None = None) -> np.ndarray:
    """Kinetic sum plus the 1/N-weighted pair interaction, d=1 factors."""
    xs, wbar, btab = _quadrature(rep, n_quad)
    n = rep.n_basis
    kin = _kinetic(rep)
    eye = np.eye(n)
    vdiff = wbar[:, None] * pot(xs[:, None] - xs[None, :]) * wbar[None, :]
    pair_tab = np.einsum("ia,ib->abi", btab, btab).reshape(n * n, -1)
    v12 = pair_tab @ vdiff @ pair_tab.T
    h = np.kron(kin, eye) + np.kron(eye, kin) + v12 / n_particles
    return 0.5 * (h + h.conj().T)


def _symmetry_defect(mat: np.ndarray, n: int) -> float:
    sw = mat.reshape(n, n, n, n).transpose(1, 0, 3, 2).reshape(n * n, n * n)
    return float(np.linalg.norm(mat - sw))


def evolve_nbody(rho2_in: DensityOperator, pot: PairPotential, cfg: EvolutionConfig,
                 method: str = "exact", n_quad: int | None = None) -> Trajectory:
    """Two-particle flow under the pair Hamiltonian.

    method='exact' uses the propagator from one eigendecomposition of the
    time-independent Hamiltonian, so the only step error is roundoff;
    method='split' does symmetric kinetic/interaction splitting and exists
    to cross-check the exact route at finite step size.
    """
    rep = OscillatorRep(cfg.hbar, cfg.n_basis)
    rep2 = _pair_rep(rep)
    if rho2_in.basis_tag != rep2.basis_tag:
        raise ValidationError("evolve_nbody: state does not match the two-particle scale")
    n = rep.n_basis
    if _symmetry_defect(rho2_in.matrix, n) > 1e-10:
        raise ValidationError("evolve_nbody: initial state is not exchange-symmetric")
    h = two_body_hamiltonian(rep, pot, n_particles=2, n_quad=n_quad)
    _stability_check(cfg.dt, cfg.hbar, float(np.linalg.norm(h, 2)))
    n_steps = max(1, int(np.ceil(cfg.t_final / cfg.dt - 1e-12)))
    dt = cfg.t_final / n_steps

    if method == "exact":
        u = _expm_factor(h, dt, cfg.hbar)
    elif method == "split":
        kin = _kinetic(rep)
        eye = np.eye(n)
        kin2 = np.kron(kin, eye) + np.kron(eye, kin)
        half_kin = _expm_factor(kin2, 0.5 * dt, cfg.hbar)
        u_int = _expm_factor(h - kin2, dt, cfg.hbar)
        u = half_kin @ u_int @ half_kin
    else:
        raise ValidationError(f"evolve_nbody: unknown method {method!r}")

    rho = rho2_in.matrix.copy()
    times = [0.0]
    states = [rho2_in]
    for k in range(n_steps):
        rho = u @ rho @ u.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        times.append((k + 1) * dt)
        states.append(DensityOperator(rho, rep2.basis_tag))
    return Trajectory(np.array(times), states, rep2)


def marginal(rho_n: DensityOperator, rep_n: OscillatorRep, keep: int = 1) -> DensityOperator:
    """Reduced state on the first `keep` factors (trace over the rest)."""
    if rho_n.basis_tag != rep_n.basis_tag:
        raise ValidationError("marginal: basis tag mismatch")
    if not 1 <= keep <= rep_n.d:
        raise ValidationError("marginal: keep out of range")
    if keep == rep_n.d:
        return rho_n
    n = rep_n.n_basis
    mat = rho_n.matrix
    for _ in range(rep_n.d - keep):
        side = mat.shape[0]
        mat = partial_trace(mat, (side // n, n), which=2)
    out_rep = OscillatorRep(rep_n.lam, n, d=keep)
    return DensityOperator(mat, out_rep.basis_tag)


def richardson_ratio(evolver, rho_in: DensityOperator, pot: PairPotential,
                     cfg: EvolutionConfig, **kw) -> float:
    """Step-halving self-convergence ratio at t_final; ~4 for 2nd order."""
    outs = []
    for scale in (1.0, 0.5, 0.25):
        c = EvolutionConfig(cfg.dt * scale, cfg.t_final, cfg.hbar, cfg.n_basis)
        outs.append(evolver(rho_in, pot, c, **kw).states[-1].matrix)
    return float(np.linalg.norm(outs[0] - outs[1]) / np.linalg.norm(outs[1] - outs[2]))


@dataclass(frozen=True)
class RateRow:
    t: float
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def convergence_rate_check(mu_in: DiscreteMeasure, r_quant: DensityOperator,
                           r_obs: DensityOperator, pot: PairPotential,
                           cfg: EvolutionConfig, t_list,
                           grid: PhaseSpaceGrid | None = None,
                           solver_cfg: SolverConfig | None = None,
                           n_particles: int = 2) -> list[RateRow]:
    """Smoothed-field transport distance between the two flows vs its envelope.

    The initial one-body state quantizes mu_in against r_quant; the
    two-particle initial state is its product, which kills the initial-data
    term of the envelope.  The left side observes both flows through the
    r_obs-smoothed fields at each requested time; the right side is the
    closed-form envelope with self-distances of the references solved, not
    assumed.  At two particles the envelope is generous -- the point is the
    inequality, not the rate.
    """
    if n_particles != 2:
        raise ValidationError("convergence_rate_check: two particles only")
    rep = OscillatorRep(cfg.hbar, cfg.n_basis)
    ref_rep = _rep_from_tag(r_quant.basis_tag)
    if ref_rep.lam != 1.0 or r_obs.basis_tag != r_quant.basis_tag:
        raise ValidationError("convergence_rate_check: references must share a scale-1 basis")

    rho_in = toeplitz_quantize(rep, r_quant, mu_in)
    rho2el = kron(rho_in.matrix, rho_in.matrix)
    rho2_in = DensityOperator(rho2el, _pair_rep(rep).basis_tag)

    t_max = float(max(t_list))
    run_cfg = EvolutionConfig(cfg.dt, max(t_max, cfg.dt), cfg.hbar, cfg.n_basis)
    hart = evolve_hartree(rho_in, pot, run_cfg)
    nbody = evolve_nbody(rho2_in, pot, run_cfg)

    mk_quant = solve_mk(r_quant, r_quant, ref_rep, solver_cfg).value_sq
    mk_obs = (mk_quant if r_obs is r_quant
              else solve_mk(r_obs, r_obs, ref_rep, solver_cfg).value_sq)
    lam_growth = 3.0 + 4.0 * pot.lip_grad ** 2
    if grid is None:
        qm = float(np.max(np.abs(mu_in.points))) / np.sqrt(rep.lam) + 1.0
        grid = default_grid(rep, q_max=qm)

    rows = []
    for t in t_list:
        t_h, state_h = hart.at(t)
        _, state_n = nbody.at(t)
        one_body = marginal(state_n, _pair_rep(rep), keep=1)
        f_h = husimi(state_h, rep, grid, ref=r_obs, method="convolution")
        f_n = husimi(one_body, rep, grid, ref=r_obs, method="convolution")
        # the observation is coarsened to a few hundred atoms: enough to
        # resolve the two flows while keeping the transport solve cheap
        lhs = w2(field_to_measure(f_h, mass_floor=1e-3, max_atoms=256),
                 field_to_measure(f_n, mass_floor=1e-3, max_atoms=256)).value_sq
        growth = np.exp(lam_growth * t_h)
        rhs = (8.0 / n_particles) * pot.grad_sup * (growth - 1.0) / lam_growth \
            + cfg.hbar * (mk_obs + growth * mk_quant)
        rows.append(RateRow(t_h, float(lhs), float(rhs)))
    return rows
