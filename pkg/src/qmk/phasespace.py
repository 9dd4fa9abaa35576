"""Phase-space transforms on uniform grids (d = 1).

The Wigner transform of a kernel k is

    W[K](x, xi) = (2 pi)^-1 integral k(x + lam y / 2, x - lam y / 2) e^{-i xi y} dy,

evaluated by synthesizing the kernel from Hermite-basis coefficients and
integrating the y-variable against an explicit Fourier matrix (a plain
discrete Fourier quadrature; grid sizes here make the fast algorithm
irrelevant and this keeps the x- and xi-grids independent).

The smoothed (Husimi-type) transform against a reference state R is the
probability density

    H[K](q, p) = trace(R^lam_{q,p} K) / (2 pi lam),

computable either literally from that trace (batched displacement
unitaries) or as the phase-space convolution W[K] * W[R-scaled]^~ where
f^~(v) = conj(f(-v)).  The two routes are independent and cross-checked.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError, TruncationError, ValidationError
from .linalg import DensityOperator
from .oscillator import (OscillatorRep, basis_values, fock_tail_mass,
                         ground_state, projector, require_within_budget)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform rectangular grid, symmetric about the origin.

    Point i along x is -x_half + i * (2 x_half / n_x); n_x, n_xi are
    powers of two so the index n/2 lands exactly on zero.
    """

    x_half: float
    xi_half: float
    n_x: int = 128
    n_xi: int = 128

    def __post_init__(self):
        for n in (self.n_x, self.n_xi):
            if n < 16 or (n & (n - 1)) != 0:
                raise ValidationError(f"grid: sizes must be powers of two >= 16, got {n}")
        if self.x_half <= 0 or self.xi_half <= 0:
            raise ValidationError("grid: half-widths must be positive")

    @property
    def xs(self) -> np.ndarray:
        return -self.x_half + (2.0 * self.x_half / self.n_x) * np.arange(self.n_x)

    @property
    def xis(self) -> np.ndarray:
        return -self.xi_half + (2.0 * self.xi_half / self.n_xi) * np.arange(self.n_xi)

    @property
    def dx(self) -> float:
        return 2.0 * self.x_half / self.n_x

    @property
    def dxi(self) -> float:
        return 2.0 * self.xi_half / self.n_xi

    @property
    def cell(self) -> float:
        return self.dx * self.dxi


def default_grid(rep: OscillatorRep, q_max: float = 0.0, n: int = 128) -> PhaseSpaceGrid:
    """Half-widths 6 sqrt(lam) max(1, |q|_max), same along both axes."""
    half = 6.0 * np.sqrt(rep.lam) * max(1.0, abs(q_max))
    return PhaseSpaceGrid(half, half, n, n)


@dataclass(frozen=True)
class PhaseSpaceField:
    """Real field sampled on a grid; kind is 'wigner', 'husimi' or 'generic'."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        if self.values.shape != (self.grid.n_x, self.grid.n_xi):
            raise ValidationError("field: values shape does not match grid")
        if np.iscomplexobj(self.values):
            raise ValidationError("field: values must be real")
        if self.kind == "husimi" and float(self.values.min()) < -1e-10:
            raise ValidationError(
                f"husimi field has negative dip {self.values.min():.3e} below -1e-10")

    @property
    def mass(self) -> float:
        return float(self.values.sum() * self.grid.cell)


def grid_tol(k: DensityOperator, rep: OscillatorRep) -> float:
    """Grid-comparison tolerance: max(1e-6, 10 x occupancy of the top 4 levels)."""
    return max(1e-6, 10.0 * fock_tail_mass(k, rep))


def _check_resolution(rep: OscillatorRep, grid: PhaseSpaceGrid) -> None:
    limit = np.sqrt(rep.lam) / 4.0
    if grid.dx > limit or grid.dxi > limit:
        raise ResolutionError(
            f"grid spacing ({grid.dx:.3f}, {grid.dxi:.3f}) too coarse for scale sqrt(lam)={np.sqrt(rep.lam):.3f}")


def _require_scale(k: DensityOperator, rep: OscillatorRep, what: str) -> None:
    if k.basis_tag != rep.basis_tag:
        raise ValidationError(f"{what}: state tagged {k.basis_tag!r}, rep is {rep.basis_tag!r}")


def wigner_values(k: DensityOperator, rep: OscillatorRep,
                  xs: np.ndarray, xis: np.ndarray) -> np.ndarray:
    """Wigner transform sampled at the product of the given point arrays."""
    _require_scale(k, rep, "wigner")
    if rep.d != 1:
        raise ValidationError("wigner: d=1 only")
    lam = rep.lam
    xi_max = float(np.max(np.abs(xis))) if len(xis) else 1.0
    du = min(np.sqrt(lam) / 6.0, np.pi * lam / (4.0 * max(xi_max, 1e-9)))
    u_half = float(np.max(np.abs(xs))) + 4.0 * np.sqrt(lam)
    m = int(np.ceil(u_half / du))
    us = du * np.arange(-m, m + 1)
    # kernel slice g_x(u) = sum_{mn} K_mn phi_m(x+u) phi_n(x-u)
    xp = xs[:, None] + us[None, :]
    xm = xs[:, None] - us[None, :]
    phi_p = basis_values(rep, xp.ravel()).reshape(len(xs), len(us), rep.n_basis)
    phi_m = basis_values(rep, xm.ravel()).reshape(len(xs), len(us), rep.n_basis)
    g = np.einsum("xum,mn,xun->xu", phi_p, k.matrix, phi_m, optimize=True)
    fourier = np.exp(-2j * np.outer(us, xis) / lam) * (du / (np.pi * lam))
    return g @ fourier


def wigner(k: DensityOperator, rep: OscillatorRep, grid: PhaseSpaceGrid) -> PhaseSpaceField:
    """Wigner field of a scale-lam state on the grid; real, mass ~ trace."""
    _check_resolution(rep, grid)
    w = wigner_values(k, rep, grid.xs, grid.xis)
    imag = float(np.max(np.abs(w.imag)))
    if imag > 1e-10:
        raise ValidationError(f"wigner: imaginary residue {imag:.3e} exceeds 1e-10")
    field = PhaseSpaceField(grid, np.ascontiguousarray(w.real), kind="wigner")
    deficit = abs(field.mass - float(np.real(np.trace(k.matrix))))
    if deficit > 5e-3:
        raise ResolutionError(f"wigner: grid captures mass only to {deficit:.2e}; enlarge or refine")
    return field


def reflect_field(f: PhaseSpaceField) -> PhaseSpaceField:
    """f^~(v) = conj(f(-v)) on the grid (real fields: plain point reflection)."""
    v = f.values
    out = v[::-1, ::-1]
    out = np.roll(out, 1, axis=0)
    out = np.roll(out, 1, axis=1)
    return PhaseSpaceField(f.grid, np.ascontiguousarray(out), kind="generic")


def convolve_fields(a: PhaseSpaceField, b: PhaseSpaceField, kind: str = "generic") -> PhaseSpaceField:
    """Linear convolution (a * b)(v) on the common grid, cell-weighted.

    Zero-padded FFT product; output index k corresponds to full-convolution
    index k + n/2 per axis, which is exact for our symmetric grids.
    """
    if a.grid != b.grid:
        raise ValidationError("convolve: fields on different grids")
    nx, nxi = a.grid.n_x, a.grid.n_xi
    fa = np.fft.rfft2(a.values, s=(2 * nx, 2 * nxi))
    fb = np.fft.rfft2(b.values, s=(2 * nx, 2 * nxi))
    full = np.fft.irfft2(fa * fb, s=(2 * nx, 2 * nxi))
    out = full[nx // 2: nx // 2 + nx, nxi // 2: nxi // 2 + nxi] * a.grid.cell
    return PhaseSpaceField(a.grid, np.ascontiguousarray(out), kind=kind)


def wigner_pairing(f1: PhaseSpaceField, f2: PhaseSpaceField, lam: float) -> float:
    """(2 pi lam)^d integral of f1 f2; equals trace(K1* K2) for Wigner pairs."""
    if f1.grid != f2.grid:
        raise ValidationError("pairing: fields on different grids")
    return float(TWO_PI * lam * np.sum(f1.values * f2.values) * f1.grid.cell)


def default_reference(rep: OscillatorRep) -> DensityOperator:
    """Scale-1 ground-state projector with this rep's basis size."""
    ref_rep = OscillatorRep(1.0, rep.n_basis, rep.d)
    return DensityOperator(projector(ground_state(ref_rep)), ref_rep.basis_tag)


def _batched_displacements(rep: OscillatorRep, qs: np.ndarray, ps: np.ndarray,
                           block: int = 2048) -> np.ndarray:
    """Stack of T_{q, p/lam} unitaries, shape (npts, n, n); d=1 only."""
    from .oscillator import _ladder_p, _ladder_x  # module-private on purpose

    x1 = _ladder_x(rep.lam, rep.n_basis)
    p1 = _ladder_p(rep.lam, rep.n_basis)
    n = rep.n_basis
    out = np.empty((len(qs), n, n), dtype=complex)
    for lo in range(0, len(qs), block):
        hi = min(lo + block, len(qs))
        gens = (ps[lo:hi, None, None] * x1[None] - qs[lo:hi, None, None] * p1[None]) / rep.lam
        w, v = np.linalg.eigh(gens)
        phase = np.exp(1j * w)
        out[lo:hi] = np.einsum("aij,aj,akj->aik", v, phase, v.conj(), optimize=True)
    return out


def husimi_point_values(k: DensityOperator, rep: OscillatorRep, ref: DensityOperator,
                        qs: np.ndarray, ps: np.ndarray) -> np.ndarray:
    """trace(R^lam_{q,p} K) / (2 pi lam) at arbitrary points (trace route)."""
    _require_scale(k, rep, "husimi")
    r = ref.retag(rep.basis_tag)  # scaling is a re-tagging
    u = _batched_displacements(rep, np.asarray(qs, float), np.asarray(ps, float))
    vals = np.einsum("aij,jk,alk,li->a", u, r.matrix, u.conj(), k.matrix, optimize=True)
    return np.real(vals) / (TWO_PI * rep.lam)


def husimi(k: DensityOperator, rep: OscillatorRep, grid: PhaseSpaceGrid,
           ref: DensityOperator | None = None, method: str = "convolution") -> PhaseSpaceField:
    """Smoothed phase-space density of K against reference ref (scale 1).

    method='convolution' forms W[K] * W[ref-scaled]^~ on the grid;
    method='trace' evaluates the defining trace at every grid point.
    """
    if ref is None:
        ref = default_reference(rep)
    if method == "trace":
        # far beyond the basis ceiling sqrt(2 lam n) the truncated translates
        # wrap around and the pointwise traces turn into order-one noise
        corner = float(np.hypot(grid.x_half, grid.xi_half))
        ceiling = np.sqrt(2.0 * rep.lam * rep.n_basis)
        if corner > 1.5 * ceiling:
            raise TruncationError(
                f"husimi trace route: grid corner radius {corner:.2f} exceeds "
                f"1.5x the basis ceiling {ceiling:.2f}; enlarge n_basis or "
                f"shrink the grid (the convolution route has no such limit)")
        qq, pp = np.meshgrid(grid.xs, grid.xis, indexing="ij")
        vals = husimi_point_values(k, rep, ref, qq.ravel(), pp.ravel()).reshape(grid.n_x, grid.n_xi)
        vals = np.where(np.abs(vals) < 1e-300, 0.0, vals)
        return PhaseSpaceField(grid, vals, kind="husimi")
    if method != "convolution":
        raise ValidationError(f"husimi: unknown method {method!r}")
    wk = wigner(k, rep, grid)
    wr = wigner(ref.retag(rep.basis_tag), rep, grid)
    return convolve_fields(wk, reflect_field(wr), kind="husimi")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite nonnegative measure on the phase plane, atoms (q_i, p_i)."""

    points: np.ndarray  # (m, 2)
    weights: np.ndarray  # (m,)

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValidationError("measure: points must have shape (m, 2)")
        if self.weights.shape != (self.points.shape[0],):
            raise ValidationError("measure: weights shape mismatch")
        if self.points.shape[0] == 0:
            raise ValidationError("measure: needs at least one atom")
        if float(self.weights.min()) < -1e-12:
            raise ValidationError("measure: negative weight")

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points, self.weights / self.total)

    def moments(self) -> tuple[np.ndarray, float]:
        """(mean vector, second moment of |z|^2 about the origin)."""
        mean = self.weights @ self.points / self.total
        sec = float(self.weights @ np.sum(self.points ** 2, axis=1) / self.total)
        return mean, sec


def measure(atoms) -> DiscreteMeasure:
    """Build a probability measure from (weight, q, p) triples."""
    arr = np.asarray(atoms, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError("measure: expected rows (weight, q, p)")
    m = DiscreteMeasure(arr[:, 1:3].copy(), arr[:, 0].copy())
    if abs(m.total - 1.0) > 1e-10:
        raise ValidationError(f"measure: weights sum to {m.total!r}, not 1")
    return m.normalized()


def translate_average(rep: OscillatorRep, ref: DensityOperator, points: np.ndarray,
                      weights: np.ndarray) -> np.ndarray:
    """Raw weighted sum of reference translates, sum_i w_i R^lam_{q_i, p_i}.

    Signed weights are allowed and no normalization is applied; the caller
    is responsible for keeping the translates inside the truncation budget.
    """
    if rep.d != 1:
        raise ValidationError("translate_average: d=1 only")
    pts = np.asarray(points, float)
    r = ref.retag(rep.basis_tag)
    u = _batched_displacements(rep, pts[:, 0], pts[:, 1])
    out = np.einsum("a,aij,jk,alk->il", np.asarray(weights, float), u, r.matrix,
                    u.conj(), optimize=True)
    return 0.5 * (out + out.conj().T)


def toeplitz_quantize(rep: OscillatorRep, ref: DensityOperator,
                      mu: DiscreteMeasure) -> DensityOperator:
    """Positive quantization sum_i w_i R^lam_{q_i, p_i} of a discrete measure."""
    if rep.d != 1:
        raise ValidationError("toeplitz_quantize: d=1 only")
    for q, p in mu.points:
        require_within_budget(rep, q, p)
    out = translate_average(rep, ref, mu.points, mu.weights / mu.total)
    return DensityOperator(out / np.real(np.trace(out)), rep.basis_tag)


def check_resolution_identity(rep: OscillatorRep, half_width: float = 6.0,
                              n_quad: int = 48, ref: DensityOperator | None = None) -> float:
    """Deviation of (2 pi lam)^-1 integral R^lam_{q,p} dq dp from the identity.

    Midpoint quadrature on a square of the given half-width; the deviation
    is the operator norm of (sum - I) restricted to the lowest
    floor(n_basis / 2) levels, where the quadrature should resolve I well.
    """
    if rep.d != 1:
        raise ValidationError("check_resolution_identity: d=1 only")
    if ref is None:
        ref = default_reference(rep)
    h = 2.0 * half_width / n_quad
    axis = -half_width + h * (np.arange(n_quad) + 0.5)
    qq, pp = np.meshgrid(axis, axis, indexing="ij")
    u = _batched_displacements(rep, qq.ravel(), pp.ravel())
    r = ref.retag(rep.basis_tag)
    s = np.einsum("aij,jk,alk->il", u, r.matrix, u.conj(), optimize=True)
    s *= h * h / (TWO_PI * rep.lam)
    nlow = rep.n_basis // 2
    block = s[:nlow, :nlow] - np.eye(nlow)
    return float(np.linalg.norm(block, 2))
