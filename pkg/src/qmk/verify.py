"""Named verification suites with deterministic rendered reports.

Each suite recomputes a family of identities or bounds from scratch and
returns rows (case, measured, target, tolerance, status), sorted by case
name so the rendered CSV is byte-stable for a fixed seed.  Three row
kinds exist: closeness (|measured - target| <= tol), upper (measured <=
target + tol) and lower (measured >= target - tol); the kind is fixed by
the check, only the five public columns are reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import (coherent_overlap, lower_bound_husimi, schatten_distance,
                     semiclassical_contrast_report, upper_bound_toeplitz,
                     wigner_product_upper_bound, _two_state_difference_spectrum)
from .errors import ValidationError
from .linalg import DensityOperator, kron
from .meanfield import (EvolutionConfig, convergence_rate_check, default_potential,
                        evolve_hartree, evolve_nbody, hartree_energy,
                        richardson_ratio, _kinetic, _pair_rep, _quadrature,
                        _symmetry_defect)
from .oscillator import (OscillatorRep, coherent_state, displace_density,
                         fock_state, ground_state, pure_density,
                         translated_scaled_density)
from .phasespace import (check_resolution_identity, default_grid,
                         default_reference, grid_tol, husimi, measure,
                         toeplitz_quantize, wigner, wigner_pairing,
                         wigner_values)
from .quantum_ot import (SolverConfig, first_moments, mk_closed_form_displaced,
                         mk_translation_formula, self_minimizer_from_kernel,
                         solve_mk, tensor_power_bound)
from .testkit import random_density

# Shared solver presets: the survey preset certifies every value to 5e-2
# (enough to separate from a 1e-6 floor question), the precise preset to
# 5e-3 with support pruning at 1e-8 for low-rank inputs.
SURVEY_CFG = SolverConfig(feas_tol=1e-3, obj_tol=1e-6, max_iters=30000,
                          gap_tol=5e-2, check_every=250)
PRECISE_CFG = SolverConfig(feas_tol=1e-5, obj_tol=1e-6, max_iters=30000,
                           gap_tol=5e-3, check_every=250, support_tol=1e-8)


@dataclass(frozen=True)
class CheckRow:
    case: str
    measured: float
    target: float
    tolerance: float
    passed: bool

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _close(case: str, measured: float, target: float, tol: float) -> CheckRow:
    return CheckRow(case, float(measured), float(target), float(tol),
                    bool(abs(measured - target) <= tol))


def _at_most(case: str, measured: float, target: float, tol: float = 0.0) -> CheckRow:
    return CheckRow(case, float(measured), float(target), float(tol),
                    bool(measured <= target + tol))


def _at_least(case: str, measured: float, target: float, tol: float = 0.0) -> CheckRow:
    return CheckRow(case, float(measured), float(target), float(tol),
                    bool(measured >= target - tol))


# ---------------------------------------------------------------- suites


def suite_resolution_identity(seed: int = 0) -> list[CheckRow]:
    """Quadrature sum of translated references against the identity."""
    rep = OscillatorRep(1.0, 24)
    rows = []
    for nq in (48, 64):
        dev = check_resolution_identity(rep, n_quad=nq)
        rows.append(_at_most(f"quad-{nq:03d}", dev, 0.0, 0.02))
    return rows


def suite_wigner_props(seed: int = 0) -> list[CheckRow]:
    """Realness, trace pairing, and translation covariance of the transform."""
    rows = []
    rep8 = OscillatorRep(1.0, 8)
    grid = default_grid(rep8)

    for i in range(3):
        k = random_density(8, seed=seed * 1000 + i, basis_tag=rep8.basis_tag)
        w = wigner_values(k, rep8, grid.xs, grid.xis)
        rows.append(_at_most(f"real-{i:02d}", float(np.max(np.abs(w.imag))),
                             0.0, 1e-10))

    for i in range(10):
        ka = random_density(8, seed=seed * 1000 + 100 + 2 * i, basis_tag=rep8.basis_tag)
        kb = random_density(8, seed=seed * 1000 + 101 + 2 * i, basis_tag=rep8.basis_tag)
        fa, fb = wigner(ka, rep8, grid), wigner(kb, rep8, grid)
        lhs = wigner_pairing(fa, fb, rep8.lam)
        rhs = float(np.real(np.trace(ka.matrix @ kb.matrix)))
        rows.append(_close(f"pairing-{i:02d}", lhs, rhs, 1e-6))

    rep24 = OscillatorRep(1.0, 24)
    shifts = [(0.7, -0.4), (-0.5, 0.3), (0.9, 0.6)]
    vecs = [ground_state(rep24), fock_state(rep24, 2),
            (ground_state(rep24) + fock_state(rep24, 1)) / np.sqrt(2.0)]
    g24 = default_grid(rep24)
    for i, ((q, p), v) in enumerate(zip(shifts, vecs)):
        k = pure_density(rep24, v)
        kd = displace_density(rep24, k, q, p)
        wd = wigner_values(kd, rep24, g24.xs, g24.xis)
        ws = wigner_values(k, rep24, g24.xs - q, g24.xis - p)
        dev = float(np.max(np.abs(wd - ws)))
        rows.append(_at_most(f"covariance-{i:02d}", dev, 0.0, grid_tol(kd, rep24)))
    return sorted(rows, key=lambda r: r.case)


def suite_husimi_positivity(seed: int = 0) -> list[CheckRow]:
    """Pointwise nonnegativity of the smoothed field, plus the two-route identity."""
    rows = []
    rep8 = OscillatorRep(1.0, 8)
    grid = default_grid(rep8)
    for i in range(50):
        k = random_density(8, seed=seed * 1000 + i, basis_tag=rep8.basis_tag)
        h = husimi(k, rep8, grid)
        rows.append(_at_least(f"min-{i:02d}", float(h.values.min()), 0.0, 1e-10))

    rep24 = OscillatorRep(1.0, 24)
    mu = measure([[0.5, 0.6, 0.3], [0.3, -0.8, 0.5], [0.2, 0.2, -0.9]])
    k = toeplitz_quantize(rep24, default_reference(rep24), mu)
    g24 = default_grid(rep24)
    hc = husimi(k, rep24, g24, method="convolution")
    ht = husimi(k, rep24, g24, method="trace")
    dev = float(np.max(np.abs(hc.values - ht.values)))
    rows.append(_at_most("routes-3-atoms", dev, 0.0, grid_tol(k, rep24)))
    return sorted(rows, key=lambda r: r.case)


def suite_displaced_coherent(seed: int = 0) -> list[CheckRow]:
    """Solver against the closed form for displaced copies of the ground state."""
    rows = []
    cases = [("lam100-self", 1.0, (0.0, 0.0), 0.04),
             ("lam100-shift-q1", 1.0, (1.0, 0.0), 0.06),
             ("lam100-shift-p2", 1.0, (0.0, 2.0), 0.12),
             ("lam025-self", 0.25, (0.0, 0.0), 0.01)]
    for name, lam, (dq, dp), tol in cases:
        rep = OscillatorRep(lam, 24)
        ka = pure_density(rep, coherent_state(rep, 0.0, 0.0))
        kb = pure_density(rep, coherent_state(rep, dq, dp))
        val = solve_mk(ka, kb, rep, PRECISE_CFG).value_sq
        rows.append(_close(name, val, mk_closed_form_displaced(dq, dp, lam), tol))
    return sorted(rows, key=lambda r: r.case)


def suite_scaling_law(seed: int = 0) -> list[CheckRow]:
    """Quadratic scale covariance: value at scale lam vs lam times scale-1 value."""
    rep1 = OscillatorRep(1.0, 8)
    rows = []
    for i in range(5):
        ra = random_density(8, rank=2, seed=seed * 1000 + 2 * i, basis_tag=rep1.basis_tag)
        rb = random_density(8, rank=2, seed=seed * 1000 + 2 * i + 1, basis_tag=rep1.basis_tag)
        base = solve_mk(ra, rb, rep1, PRECISE_CFG).value_sq
        for lam, tag in ((0.5, "lam050"), (2.0, "lam200")):
            rep = OscillatorRep(lam, 8)
            ka = translated_scaled_density(rep, ra, 0.0, 0.0)
            kb = translated_scaled_density(rep, rb, 0.0, 0.0)
            val = solve_mk(ka, kb, rep, PRECISE_CFG).value_sq
            rel = abs(val - lam * base) / val
            rows.append(_at_most(f"{tag}-pair-{i:02d}", rel, 0.0, 0.02))
    return sorted(rows, key=lambda r: r.case)


def suite_translation_law(seed: int = 0) -> list[CheckRow]:
    """Closed form for displaced scaled pairs against the direct solve."""
    rep1 = OscillatorRep(1.0, 16)
    g = ground_state(rep1)
    f1, f2 = fock_state(rep1, 1), fock_state(rep1, 2)
    plus = (g + f1) / np.sqrt(2.0)
    cases = [
        ("case-0-ground-ground", g, g, 1.0, (0.3, -0.2, 1.1, 0.4)),
        ("case-1-ground-fock1", g, f1, 1.0, (0.0, 0.0, 1.0, 0.0)),
        ("case-2-fock1-fock2", f1, f2, 1.0, (-0.5, 0.5, 0.5, -0.5)),
        ("case-3-half-scale", g, f1, 0.5, (0.2, 0.1, -0.3, 0.6)),
        ("case-4-moving-ref", plus, g, 1.0, (0.4, -0.3, -0.2, 0.5)),
    ]
    rows = []
    for name, va, vb, lam, (qa, pa, qb, pb) in cases:
        ra, rb = pure_density(rep1, va), pure_density(rep1, vb)
        base = solve_mk(ra, rb, rep1, PRECISE_CFG).value_sq
        predicted = mk_translation_formula(ra, rb, base, lam, qa, pa, qb, pb)
        rep = OscillatorRep(lam, 16)
        ka = translated_scaled_density(rep, ra, qa, pa)
        kb = translated_scaled_density(rep, rb, qb, pb)
        val = solve_mk(ka, kb, rep, PRECISE_CFG).value_sq
        rows.append(_at_most(name, abs(val - predicted) / val, 0.0, 0.02))
    return sorted(rows, key=lambda r: r.case)


def suite_floor_2d(seed: int = 0) -> list[CheckRow]:
    """Universal lower bound 2 d lam over random full-rank pairs."""
    rep = OscillatorRep(1.0, 8)
    rows = []
    for i in range(20):
        ka = random_density(8, seed=seed * 1000 + 2 * i, basis_tag=rep.basis_tag)
        kb = random_density(8, seed=seed * 1000 + 2 * i + 1, basis_tag=rep.basis_tag)
        val = solve_mk(ka, kb, rep, SURVEY_CFG).value_sq
        rows.append(_at_least(f"pair-{i:02d}", val, 2.0, 1e-6))
    return rows


def suite_tensorization(seed: int = 0) -> list[CheckRow]:
    """Two-factor product states cost at most twice the single-factor value."""
    rep = OscillatorRep(1.0, 6)
    rows = []
    for i in range(3):
        ra = random_density(6, rank=2, seed=seed * 1000 + 2 * i, basis_tag=rep.basis_tag)
        rb = random_density(6, rank=2, seed=seed * 1000 + 2 * i + 1, basis_tag=rep.basis_tag)
        lhs, rhs = tensor_power_bound(ra, rb, rep, PRECISE_CFG)
        rows.append(_at_most(f"pair-{i:02d}", lhs / rhs, 1.0, 0.02))
    return rows


def _gaussian_kernel(zs: np.ndarray, mix_width: float, envelope: float) -> np.ndarray:
    """Schur product of a squared-exponential kernel with a rank-one envelope."""
    g = np.exp(-((zs[:, None] - zs[None, :]) ** 2) / mix_width)
    e = np.exp(-(zs ** 2) / envelope)
    return g * np.outer(e, e)


def suite_self_minimizer(seed: int = 0) -> list[CheckRow]:
    """Smoothed kernel doublings sit on the distance floor to themselves."""
    rep1 = OscillatorRep(1.0, 16)
    zs = np.linspace(-6.0, 6.0, 121)
    rows = []
    # long correlation ranges keep the doubled kernel's spectrum short,
    # which keeps the reduced coupling problem small
    for name, mix, env in (("kernel-long-range", 24.0, 3.0),
                           ("kernel-short-range", 16.0, 4.0)):
        r = self_minimizer_from_kernel(_gaussian_kernel(zs, mix, env), zs, rep1)
        val = solve_mk(r, r, rep1, PRECISE_CFG).value_sq
        rows.append(_close(name, val, 2.0, 0.04))
    return sorted(rows, key=lambda r: r.case)


SANDWICH_CASES = [
    # (name, lam, reference pair tag, mu1 atoms, mu2 atoms)
    ("case-0-coherent-shift", 1.0, "gg", [[1.0, 0.0, 0.0]], [[1.0, 1.0, 0.0]]),
    ("case-1-coincident", 1.0, "gg", [[1.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]]),
    ("case-2-diagonal", 1.0, "gg", [[1.0, 0.5, 0.5]], [[1.0, -0.5, -0.5]]),
    ("case-3-split-vs-point", 1.0, "gg",
     [[0.5, 0.0, 0.0], [0.5, 1.0, 0.0]], [[1.0, 0.5, 0.0]]),
    ("case-4-cross-axes", 1.0, "gg",
     [[0.5, -1.0, 0.0], [0.5, 1.0, 0.0]], [[0.5, 0.0, -1.0], [0.5, 0.0, 1.0]]),
    ("case-5-lopsided", 1.0, "gg",
     [[0.6, 0.8, -0.2], [0.25, -0.4, 0.6], [0.15, 0.0, 0.0]],
     [[0.7, 0.2, 0.2], [0.3, -0.6, -0.5]]),
    ("case-6-half-scale", 0.5, "gg", [[1.0, 0.0, 0.0]], [[1.0, 1.0, 1.0]]),
    ("case-7-moving-ref", 1.0, "gp", [[1.0, 0.0, 0.0]], [[1.0, 0.8, 0.0]]),
    ("case-8-both-moving", 1.0, "pp",
     [[0.5, -0.7, 0.1], [0.5, 0.7, -0.1]], [[1.0, 0.0, 0.8]]),
    ("case-9-spread", 1.0, "gg",
     [[0.4, 1.2, -0.6], [0.3, -1.2, 0.6], [0.3, 0.0, 0.0]], [[1.0, 0.0, 0.0]]),
]


def suite_sandwich(seed: int = 0) -> list[CheckRow]:
    """Lower and upper bounds bracket the solved distance on a fixed suite."""
    rep1 = OscillatorRep(1.0, 16)
    g = pure_density(rep1, ground_state(rep1))
    plus = pure_density(rep1, (ground_state(rep1) + fock_state(rep1, 1)) / np.sqrt(2.0))
    refs = {"gg": (g, g), "gp": (g, plus), "pp": (plus, plus)}
    rows = []
    for name, lam, pair, a1, a2 in SANDWICH_CASES:
        r1, r2 = refs[pair]
        rep = OscillatorRep(lam, 16)
        mu1, mu2 = measure(a1), measure(a2)
        ka = toeplitz_quantize(rep, r1, mu1)
        kb = toeplitz_quantize(rep, r2, mu2)
        mk1_sq = solve_mk(r1, r2, rep1, PRECISE_CFG).value_sq
        mk = solve_mk(ka, kb, rep, PRECISE_CFG).value_sq
        slack = 0.02 * max(1.0, abs(mk))
        low = lower_bound_husimi(ka, kb, r1, r2, rep, mk1_sq=mk1_sq, max_atoms=256)
        up_t = upper_bound_toeplitz(r1, r2, mu1, mu2, rep, mk1_sq=mk1_sq)
        up_w = wigner_product_upper_bound(ka, kb, rep)
        rows.append(_at_most(f"{name}-lower", low, mk, slack))
        rows.append(_at_least(f"{name}-upper-quantized", up_t, mk, slack))
        rows.append(_at_least(f"{name}-upper-product", up_w, mk, slack))
    return sorted(rows, key=lambda r: r.case)


def suite_schatten_contrast(seed: int = 0) -> list[CheckRow]:
    """Norm saturation versus transport tracking for shrinking-scale pairs."""
    target = float(np.sqrt(2.0) * np.sqrt(1.0 - np.exp(-0.5)))
    spec = _two_state_difference_spectrum(coherent_overlap(0.0, 0.0, 1.0, 0.0, 1.0))
    rows = [_close("route-series", float(np.sqrt(np.sum(spec ** 2))), target, 1e-4)]
    rep = OscillatorRep(1.0, 24)
    ka = pure_density(rep, coherent_state(rep, 0.0, 0.0))
    kb = pure_density(rep, coherent_state(rep, 1.0, 0.0))
    rows.append(_close("route-matrix", schatten_distance(ka, kb, 2), target, 1e-4))

    for r in semiclassical_contrast_report():
        ratio = int(round(r.delta ** 2 / r.hbar))
        stem = f"d{int(r.delta)}-r{ratio:03d}"
        rows.append(_at_least(f"{stem}-saturation", r.schatten2,
                              0.99 * np.sqrt(2.0), 0.0))
        if ratio >= 40:
            rows.append(_at_most(f"{stem}-tracking",
                                 abs(r.mk_root / r.delta - 1.0), 0.0, 0.03))
    return sorted(rows, key=lambda r: r.case)


def suite_meanfield_rate(seed: int = 0) -> list[CheckRow]:
    """Two-particle flow against its one-body approximation, with conservation."""
    pot = default_potential()
    rows = []
    for hbar, tag in ((1.0, "h100"), (0.5, "h050")):
        rep = OscillatorRep(hbar, 16)
        cfg = EvolutionConfig(dt=2e-3, t_final=0.5, hbar=hbar, n_basis=16)
        rho0 = pure_density(rep, ground_state(rep))
        rho2 = DensityOperator(kron(rho0.matrix, rho0.matrix), _pair_rep(rep).basis_tag)

        traj2 = evolve_nbody(rho2, pot, cfg)
        final = traj2.states[-1].matrix
        rows.append(_at_most(f"{tag}-nbody-trace",
                             abs(float(np.real(np.trace(final))) - 1.0), 0.0, 1e-10))
        rows.append(_at_most(f"{tag}-nbody-purity",
                             abs(float(np.real(np.trace(final @ final))) - 1.0), 0.0, 1e-8))
        rows.append(_at_most(f"{tag}-nbody-symmetry",
                             _symmetry_defect(final, cfg.n_basis), 0.0, 1e-8))

        errs = []
        for dt in (2e-3, 1e-3, 5e-4):
            c = EvolutionConfig(dt, 0.2, hbar, 16)
            ex = evolve_nbody(rho2, pot, c, method="exact").states[-1].matrix
            sp = evolve_nbody(rho2, pot, c, method="split").states[-1].matrix
            errs.append(float(np.linalg.norm(ex - sp)))
        rows.append(_close(f"{tag}-nbody-dt-ratio", errs[0] / errs[1], 4.0, 0.5))

        trajh = evolve_hartree(rho0, pot, cfg)
        xs, wbar, btab = _quadrature(rep)
        vtab = pot(xs[:, None] - xs[None, :])
        kin = _kinetic(rep)
        e0 = hartree_energy(trajh.states[0].matrix, kin, vtab, wbar, btab)
        e1 = hartree_energy(trajh.states[-1].matrix, kin, vtab, wbar, btab)
        rows.append(_at_most(f"{tag}-hartree-trace",
                             abs(float(np.real(np.trace(trajh.states[-1].matrix))) - 1.0),
                             0.0, 1e-10))
        rows.append(_at_most(f"{tag}-hartree-energy", abs(e1 - e0), 0.0, 1e-6))
        rows.append(_close(f"{tag}-hartree-dt-ratio",
                           richardson_ratio(evolve_hartree, rho0, pot, cfg), 4.0, 0.5))

        gauss = default_reference(rep)
        mu = measure([[1.0, 0.5, 0.0]])
        for r in convergence_rate_check(mu, gauss, gauss, pot, cfg,
                                        t_list=[0.0, 0.25, 0.5]):
            rows.append(_at_most(f"{tag}-rate-t{int(round(100 * r.t)):03d}",
                                 r.lhs, r.rhs, 0.0))
    return sorted(rows, key=lambda r: r.case)


SUITES = {
    "resolution-identity": suite_resolution_identity,
    "wigner-props": suite_wigner_props,
    "husimi-positivity": suite_husimi_positivity,
    "displaced-coherent": suite_displaced_coherent,
    "scaling-law": suite_scaling_law,
    "translation-law": suite_translation_law,
    "floor-2d": suite_floor_2d,
    "tensorization": suite_tensorization,
    "self-minimizer": suite_self_minimizer,
    "sandwich": suite_sandwich,
    "schatten-contrast": suite_schatten_contrast,
    "meanfield-rate": suite_meanfield_rate,
}


def run_suite(name: str, seed: int = 0) -> list[CheckRow]:
    if name not in SUITES:
        raise ValidationError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    return SUITES[name](seed)


def suite_passed(rows: list[CheckRow]) -> bool:
    return all(r.passed for r in rows)


def render_report(rows: list[CheckRow]) -> str:
    """CSV text, 17 significant digits, one line per check."""
    lines = ["case,measured,target,tolerance,status"]
    for r in rows:
        lines.append(f"{r.case},{r.measured:.16e},{r.target:.16e},"
                     f"{r.tolerance:.16e},{r.status}")
    return "\n".join(lines) + "\n"
