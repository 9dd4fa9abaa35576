"""Inequalities framing the transport pseudo-distance by classical proxies.

Three families are assembled on top of the coupling solver, the phase-space
transforms and the discrete transport code:

* an upper bound for pairs produced by positive quantization of discrete
  measures -- the classical squared transport cost between the measures,
  plus the scaled reference distance, plus first-moment cross terms;
* a lower bound through smoothed phase-space densities -- the classical
  cost between the two discretized fields, minus the scaled reference
  distance, plus the matching cross terms;
* Schatten-norm comparisons for coherent pairs, where the overlap makes
  every norm explicit, including the small-scale saturation table.

Both bounds carry their moment cross terms with one shared sign
convention, obtained by expanding the conjugated cost for displaced
pairs; the solver cross-checks in the verification suites arbitrate it
numerically.  All phase-space integrals here are plain cell-weighted
sums; second moments never require a four-dimensional grid because the
quadratic cost splits into per-field moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .classical_ot import field_to_measure, w2
from .errors import ValidationError
from .linalg import DensityOperator
from .oscillator import OscillatorRep
from .phasespace import (DiscreteMeasure, PhaseSpaceField, PhaseSpaceGrid,
                         default_grid, husimi, translate_average, wigner)
from .quantum_ot import SolverConfig, _rep_from_tag, first_moments, solve_mk

TWO_PI = 2.0 * np.pi


def _scale1_rep(r1: DensityOperator, r2: DensityOperator, what: str) -> OscillatorRep:
    ref = _rep_from_tag(r1.basis_tag)
    if r2.basis_tag != r1.basis_tag or ref.lam != 1.0:
        raise ValidationError(f"{what}: references must share a scale-1 basis")
    return ref


def _reference_mk1(r1: DensityOperator, r2: DensityOperator, ref: OscillatorRep,
                   mk1_sq: float | None, cfg: SolverConfig | None) -> float:
    """Scale-1 squared distance between the references, solved if not given."""
    if mk1_sq is not None:
        return float(mk1_sq)
    return solve_mk(r1, r2, ref, cfg).value_sq


def upper_bound_toeplitz(r1: DensityOperator, r2: DensityOperator,
                         mu1: DiscreteMeasure, mu2: DiscreteMeasure,
                         rep: OscillatorRep, mk1_sq: float | None = None,
                         cfg: SolverConfig | None = None) -> float:
    """Upper bound on the squared distance between quantized measure pairs.

    The pair of states is (positive quantization of mu1 against r1,
    likewise mu2 against r2) at the scale of ``rep``.  Transporting the
    classical optimal plan atom by atom, with one fixed reference coupling
    riding along, gives

        W2(mu1, mu2)^2 + lam * MK1(r1, r2)^2 + cross,

    where the cross terms pair the difference of the measure barycenters
    with the difference of the scale-1 reference moments.
    """
    ref = _scale1_rep(r1, r2, "upper_bound_toeplitz")
    base = _reference_mk1(r1, r2, ref, mk1_sq, cfg)
    lam = rep.lam
    m1, m2 = first_moments(r1, ref), first_moments(r2, ref)
    c1, _ = mu1.normalized().moments()
    c2, _ = mu2.normalized().moments()
    val = w2(mu1, mu2).value_sq + lam * base
    val += 2.0 * np.sqrt(lam) * float(
        (c1[0] - c2[0]) * np.sum(m1.mean_position - m2.mean_position)
        + (c1[1] - c2[1]) * np.sum(m1.mean_momentum - m2.mean_momentum))
    return float(val)


def lower_bound_husimi(ka: DensityOperator, kb: DensityOperator,
                       r1: DensityOperator, r2: DensityOperator,
                       rep: OscillatorRep, grid: PhaseSpaceGrid | None = None,
                       mk1_sq: float | None = None,
                       cfg: SolverConfig | None = None,
                       max_atoms: int = 1024, mass_floor: float = 1e-3) -> float:
    """Lower bound on the squared distance through smoothed fields.

    Each state is turned into its nonnegative phase-space density against
    its own scale-1 reference (convolution route, which stays accurate on
    wide grids), discretized, and compared by the classical transport
    distance.  The smoothing overhead is removed by subtracting the scaled
    reference distance; moment cross terms enter with the same convention
    as the upper bound.  For coincident states the bound is nonpositive --
    vacuous but valid.
    """
    ref = _scale1_rep(r1, r2, "lower_bound_husimi")
    base = _reference_mk1(r1, r2, ref, mk1_sq, cfg)
    lam = rep.lam
    if grid is None:
        qm = 0.0
        for k in (ka, kb):
            m = first_moments(k, rep)
            qm = max(qm, float(np.max(np.abs(m.mean_position))),
                     float(np.max(np.abs(m.mean_momentum))))
        grid = default_grid(rep, q_max=qm / np.sqrt(lam))
    h1 = husimi(ka, rep, grid, ref=r1, method="convolution")
    h2 = husimi(kb, rep, grid, ref=r2, method="convolution")
    dist = w2(field_to_measure(h1, mass_floor=mass_floor, max_atoms=max_atoms),
              field_to_measure(h2, mass_floor=mass_floor, max_atoms=max_atoms)).value_sq
    mr1, mr2 = first_moments(r1, ref), first_moments(r2, ref)
    ma, mb = first_moments(ka, rep), first_moments(kb, rep)
    val = dist - lam * base
    val += 2.0 * np.sqrt(lam) * float(
        np.sum((mr1.mean_position - mr2.mean_position) * (ma.mean_position - mb.mean_position))
        + np.sum((mr1.mean_momentum - mr2.mean_momentum) * (ma.mean_momentum - mb.mean_momentum)))
    return float(val)


def husimi_pairing_check(k: DensityOperator, ref: DensityOperator,
                         rep: OscillatorRep, f: PhaseSpaceField,
                         weight_floor: float = 1e-14) -> float:
    """Deviation between the two sides of the quantization pairing.

    Field side: the cell-weighted integral of f against the smoothed
    density of K computed by the convolution route.  Operator side: the
    trace of K against the signed translate average of the reference with
    weights f * cell / (2 pi lam).  The routes share no code path beyond
    the translates themselves, so agreement is a genuine cross-check.
    Cells whose relative weight is below ``weight_floor`` are dropped
    from the operator side (they also fall outside the translate budget).
    """
    h = husimi(k, rep, f.grid, ref=ref, method="convolution")
    field_side = float(np.sum(f.values * h.values) * f.grid.cell)

    qq, pp = np.meshgrid(f.grid.xs, f.grid.xis, indexing="ij")
    wts = f.values.ravel() * f.grid.cell / (TWO_PI * rep.lam)
    keep = np.abs(wts) > weight_floor * max(np.abs(wts).max(), 1e-300)
    pts = np.column_stack([qq.ravel()[keep], pp.ravel()[keep]])
    op = translate_average(rep, ref, pts, wts[keep])
    op_side = float(np.real(np.einsum("ij,ji->", op, k.matrix)))
    return abs(field_side - op_side)


def _field_moments(f: PhaseSpaceField) -> tuple[float, float, float, float, float]:
    """(mass, <q>, <p>, <q^2>, <p^2>) of a field, unnormalized cell sums."""
    cell = f.grid.cell
    qq, pp = np.meshgrid(f.grid.xs, f.grid.xis, indexing="ij")
    v = f.values
    return (float(v.sum() * cell), float((qq * v).sum() * cell),
            float((pp * v).sum() * cell), float((qq ** 2 * v).sum() * cell),
            float((pp ** 2 * v).sum() * cell))


def wigner_product_upper_bound(ka: DensityOperator, kb: DensityOperator,
                               rep: OscillatorRep,
                               grid: PhaseSpaceGrid | None = None) -> float:
    """Upper bound from the product of the two phase-space transforms.

    The quadratic cost integrated against W[ka](z) W[kb](z') splits into
    second moments and cross first moments of each field separately, so
    the four-dimensional integral collapses to ten scalar quadratures.
    """
    if grid is None:
        qm = 0.0
        for k in (ka, kb):
            m = first_moments(k, rep)
            qm = max(qm, float(np.max(np.abs(m.mean_position))),
                     float(np.max(np.abs(m.mean_momentum))))
        grid = default_grid(rep, q_max=qm / np.sqrt(rep.lam))
    wa = wigner(ka, rep, grid)
    wb = wigner(kb, rep, grid)
    ma, qa, pa, qqa, ppa = _field_moments(wa)
    mb, qb, pb, qqb, ppb = _field_moments(wb)
    return float(qqa * mb - 2.0 * qa * qb + ma * qqb
                 + ppa * mb - 2.0 * pa * pb + ma * ppb)


def schatten_distance(r1: DensityOperator, r2: DensityOperator, p: float) -> float:
    """Schatten p-norm of the difference of two operators, by spectrum."""
    if not p >= 1:
        raise ValidationError("schatten_distance: p must be >= 1")
    s = np.linalg.svd(r1.matrix - r2.matrix, compute_uv=False)
    if np.isinf(p):
        return float(s[0])
    return float(np.sum(s ** p) ** (1.0 / p))


def coherent_overlap(q1: float, p1: float, q2: float, p2: float,
                     hbar: float) -> complex:
    """Inner product of two Gaussian coherent states, by series.

    The number-basis coefficients of a coherent state at complex label
    alpha = (q + i p) / sqrt(2 hbar) are exp(-|alpha|^2/2) alpha^n / sqrt(n!);
    the overlap series is summed in the log domain, so labels far apart
    (deep semiclassical rows) stay finite.  Squared modulus follows the
    Gaussian law exp(-(dq^2 + dp^2) / (2 hbar)), which tests verify.
    """
    if hbar <= 0:
        raise ValidationError("coherent_overlap: hbar must be positive")
    a = (q1 + 1j * p1) / np.sqrt(2.0 * hbar)
    b = (q2 + 1j * p2) / np.sqrt(2.0 * hbar)
    gauss = -0.5 * (abs(a) ** 2 + abs(b) ** 2)
    w = np.conj(a) * b
    r = abs(w)
    if r == 0:
        return complex(np.exp(gauss))
    n = np.arange(int(np.ceil(r + 10.0 * np.sqrt(r + 1.0) + 30.0)))
    mags = n * np.log(r) - gammaln(n + 1.0)
    shift = float(mags.max())
    ssum = np.sum(np.exp(mags - shift) * np.exp(1j * n * np.angle(w)))
    return complex(np.exp(shift + np.log(ssum) + gauss))


def coherent_schatten_formula(q1: float, p1: float, q2: float, p2: float,
                              hbar: float, p: float) -> float:
    """Closed-form Schatten p-distance between two coherent projectors."""
    if not p >= 1:
        raise ValidationError("coherent_schatten_formula: p must be >= 1")
    ov_sq = np.exp(-((q1 - q2) ** 2 + (p1 - p2) ** 2) / (2.0 * hbar))
    root = np.sqrt(max(1.0 - ov_sq, 0.0))
    if np.isinf(p):
        return float(root)
    return float(2.0 ** (1.0 / p) * root)


def _two_state_difference_spectrum(s: complex) -> np.ndarray:
    """Eigenvalues of the difference of two pure projectors with overlap s."""
    a = np.array([1.0, 0.0], complex)
    b = np.array([s, np.sqrt(max(1.0 - abs(s) ** 2, 0.0))], complex)
    diff = np.outer(a, a.conj()) - np.outer(b, b.conj())
    return np.linalg.eigvalsh(diff)


@dataclass(frozen=True)
class ContrastRow:
    delta: float
    hbar: float
    schatten2: float
    mk_root: float
    saturated: bool   # Schatten-2 within 1% of its ceiling sqrt(2)
    tracks: bool      # sqrt of the squared distance within 3% of |delta|


def semiclassical_contrast_report(displacements=(1.0, 2.0),
                                  hbar_list=None) -> list[ContrastRow]:
    """Saturation-versus-tracking table for coherent pairs at shrinking scale.

    Per (delta, hbar): the Schatten-2 distance saturates at sqrt(2) once
    the overlap dies, while the transport distance keeps tracking the
    displacement.  The Schatten column is spectral (two-dimensional span,
    series overlap); the transport column is the closed form
    sqrt(delta^2 + 2 hbar).  Default scales are delta^2 / ratio for
    ratio in {20, 40, 100, 400}.
    """
    rows = []
    for delta in displacements:
        hbars = hbar_list if hbar_list is not None else [
            delta ** 2 / r for r in (20.0, 40.0, 100.0, 400.0)]
        for hbar in hbars:
            spec = _two_state_difference_spectrum(
                coherent_overlap(0.0, 0.0, float(delta), 0.0, hbar))
            s2 = float(np.sqrt(np.sum(spec ** 2)))
            mk_root = float(np.sqrt(delta ** 2 + 2.0 * hbar))
            rows.append(ContrastRow(
                float(delta), float(hbar), s2, mk_root,
                saturated=s2 >= 0.99 * np.sqrt(2.0),
                tracks=abs(mk_root / delta - 1.0) <= 0.03))
    return sorted(rows, key=lambda r: (r.delta, -r.hbar))
