"""Truncated harmonic-oscillator representation at scale lambda.

States live in the first n_basis Hermite levels of the scaled basis
phi_n(x) = lam**-0.25 h_n(x/sqrt(lam)); in that basis the position and
momentum matrices are the usual ladder expressions

    X[n, n+1] = sqrt(lam (n+1) / 2),   P[n, n+1] = -i sqrt(lam (n+1) / 2),

so [X, P] = i lam away from the truncation edge.  P is the scaled
momentum -i lam d/dx.  Two translation conventions coexist:

* ``weyl_translate`` is the plain unitary (T_{q,p} psi)(x) =
  psi(x - q) exp(i p (x - q/2)), generated by p X - q P / lam;
* ``phase_displacement`` is T_{q, p/lam}, which moves the *scaled*
  observables (X, P) by exactly (q, p).  Coherent states and translated
  densities use the second one, so their labels are the physical
  phase-space means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .errors import TruncationError, ValidationError
from .linalg import DensityOperator, expm_hermitian_generator, kron

DEFICIT_HARD_LIMIT = 1e-2  # coherent state may lose at most 1% of its norm


@dataclass(frozen=True)
class OscillatorRep:
    """Truncated oscillator basis: scale lam, n_basis levels per axis, d axes."""

    lam: float
    n_basis: int
    d: int = 1

    def __post_init__(self):
        if self.lam <= 0:
            raise ValidationError(f"rep: lambda must be positive, got {self.lam}")
        if self.n_basis < 4:
            raise ValidationError("rep: n_basis must be at least 4")
        if self.d not in (1, 2):
            raise ValidationError("rep: d must be 1 or 2")
        if self.d == 2 and self.n_basis > 16:
            raise ValidationError("rep: d=2 supports n_basis <= 16 per axis")

    @property
    def dim(self) -> int:
        return self.n_basis ** self.d

    @property
    def basis_tag(self) -> str:
        return f"osc:l={self.lam:.12g}:n={self.n_basis}:d={self.d}"

    def with_lambda(self, lam: float) -> "OscillatorRep":
        return OscillatorRep(lam, self.n_basis, self.d)


def _ladder_x(lam: float, n: int) -> np.ndarray:
    off = np.sqrt(lam * np.arange(1, n) / 2.0)
    m = np.zeros((n, n), dtype=complex)
    m[np.arange(n - 1), np.arange(1, n)] = off
    m[np.arange(1, n), np.arange(n - 1)] = off
    return m


def _ladder_p(lam: float, n: int) -> np.ndarray:
    off = np.sqrt(lam * np.arange(1, n) / 2.0)
    m = np.zeros((n, n), dtype=complex)
    m[np.arange(n - 1), np.arange(1, n)] = -1j * off
    m[np.arange(1, n), np.arange(n - 1)] = 1j * off
    return m


def _embed(rep: OscillatorRep, op: np.ndarray, axis: int) -> np.ndarray:
    if rep.d == 1:
        return op
    eye = np.eye(rep.n_basis, dtype=complex)
    return kron(op, eye) if axis == 0 else kron(eye, op)


def position_operator(rep: OscillatorRep, axis: int = 0) -> np.ndarray:
    """Matrix of multiplication by x_axis in the scaled basis."""
    _check_axis(rep, axis)
    return _embed(rep, _ladder_x(rep.lam, rep.n_basis), axis)


def momentum_operator(rep: OscillatorRep, axis: int = 0) -> np.ndarray:
    """Matrix of -i lam d/dx_axis in the scaled basis."""
    _check_axis(rep, axis)
    return _embed(rep, _ladder_p(rep.lam, rep.n_basis), axis)


def _check_axis(rep: OscillatorRep, axis: int) -> None:
    if not 0 <= axis < rep.d:
        raise ValidationError(f"axis {axis} out of range for d={rep.d}")


def ground_state(rep: OscillatorRep) -> np.ndarray:
    v = np.zeros(rep.dim, dtype=complex)
    v[0] = 1.0
    return v


def fock_state(rep: OscillatorRep, n: int) -> np.ndarray:
    """Number state |n> (d=1) as a basis vector."""
    if rep.d != 1:
        raise ValidationError("fock_state: d=1 only")
    if not 0 <= n < rep.n_basis:
        raise ValidationError(f"fock_state: level {n} outside basis of size {rep.n_basis}")
    v = np.zeros(rep.dim, dtype=complex)
    v[n] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    return np.outer(vec, vec.conj())


def pure_density(rep: OscillatorRep, vec: np.ndarray) -> DensityOperator:
    """Rank-one density tagged with the rep's basis, normalizing the vector."""
    nrm = float(np.linalg.norm(vec))
    if nrm <= 0:
        raise ValidationError("pure_density: zero vector")
    return DensityOperator(projector(np.asarray(vec, dtype=complex) / nrm), rep.basis_tag)


def _as_vec(rep: OscillatorRep, z) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (rep.d,):
        raise ValidationError(f"expected {rep.d} phase-space components, got shape {z.shape}")
    return z


def weyl_translate(rep: OscillatorRep, q, p, unitarize: bool = True) -> np.ndarray:
    """Unitary of (T_{q,p} psi)(x) = psi(x-q) exp(i p.(x - q/2))."""
    q, p = _as_vec(rep, q), _as_vec(rep, p)
    factors = []
    x1 = _ladder_x(rep.lam, rep.n_basis)
    p1 = _ladder_p(rep.lam, rep.n_basis)
    for j in range(rep.d):
        g = p[j] * x1 - (q[j] / rep.lam) * p1
        factors.append(expm_hermitian_generator(g, unitarize=unitarize))
    return kron(*factors) if rep.d > 1 else factors[0]


def phase_displacement(rep: OscillatorRep, q, p, unitarize: bool = True) -> np.ndarray:
    """Unitary T_{q, p/lam}: shifts <X> by q and <P> by p."""
    q = _as_vec(rep, q)
    p = _as_vec(rep, p)
    return weyl_translate(rep, q, p / rep.lam, unitarize=unitarize)


def coherent_state(rep: OscillatorRep, q, p, check_budget: bool = True) -> np.ndarray:
    """Displaced ground state with phase-space mean (q, p).

    Labels are physical: <X> = q, <P> = p at the rep's own scale.
    """
    if check_budget:
        require_within_budget(rep, q, p)
    return phase_displacement(rep, q, p) @ ground_state(rep)


def displace_density(rep: OscillatorRep, k: DensityOperator, q, p) -> DensityOperator:
    """Conjugate a scale-lam density by the phase displacement T_{q, p/lam}."""
    if k.basis_tag != rep.basis_tag:
        raise ValidationError(f"displace_density: state tagged {k.basis_tag!r}, rep is {rep.basis_tag!r}")
    u = phase_displacement(rep, q, p)
    return DensityOperator(u @ k.matrix @ u.conj().T, rep.basis_tag)


def translated_scaled_density(rep: OscillatorRep, r: DensityOperator, q, p,
                              check_budget: bool = True) -> DensityOperator:
    """Scale a reference density from lambda=1 to this rep, then displace it.

    The scaling S_lam is a pure re-tagging: the matrix in the scaled basis
    equals the matrix of r in the unscaled one.
    """
    ref = OscillatorRep(1.0, rep.n_basis, rep.d)
    if r.basis_tag != ref.basis_tag:
        raise ValidationError(
            f"translated_scaled_density: reference tagged {r.basis_tag!r}, expected {ref.basis_tag!r}")
    if check_budget:
        require_within_budget(rep, q, p)
    return displace_density(rep, r.retag(rep.basis_tag), q, p)


def displacement_deficit(rep: OscillatorRep, q, p) -> float:
    """A-priori norm loss of the coherent state at (q, p) under truncation.

    The Fock populations of a displaced ground state are Poisson with mean
    nu_j = (q_j^2 + p_j^2) / (2 lam) per axis; the deficit is the Poisson
    tail mass at or beyond the truncation level.
    """
    q, p = _as_vec(rep, q), _as_vec(rep, p)
    keep = 1.0
    for j in range(rep.d):
        nu = (q[j] ** 2 + p[j] ** 2) / (2.0 * rep.lam)
        keep *= float(gammaincc(rep.n_basis, nu)) if nu > 0 else 1.0
    return 1.0 - keep


def require_within_budget(rep: OscillatorRep, q, p, hard_limit: float = DEFICIT_HARD_LIMIT) -> float:
    d = displacement_deficit(rep, q, p)
    if d > hard_limit:
        raise TruncationError(
            f"displacement ({q}, {p}) loses {d:.2%} of its norm at n_basis={rep.n_basis}", deficit=d)
    return d


def trunc_tol(rep: OscillatorRep, points=((0.0, 0.0),)) -> float:
    """Comparison tolerance driven by the most displaced state involved."""
    worst = max(require_within_budget(rep, q, p) for q, p in points)
    return max(10.0 * worst, 1e-12)


def _edge_projector(rep: OscillatorRep, axis: int) -> np.ndarray:
    e = np.zeros((rep.n_basis, rep.n_basis), dtype=complex)
    e[rep.n_basis - 1, rep.n_basis - 1] = 1.0
    return _embed(rep, e, axis)


def cost_operator(rep: OscillatorRep) -> np.ndarray:
    """Quadratic transport cost on the doubled space.

    C = sum_j (X_j x I - I x X_j)^2 + (P_j x I - I x P_j)^2, plus the
    top-level compensation lam * n_basis * (N_edge x I + I x N_edge) per
    axis, which makes the matrix the exact compression of the untruncated
    quadratic form.  Without it the spectrum dips below the 2 d lam
    zero-point floor whenever a marginal occupies the edge level.
    """
    n = rep.dim
    eye = np.eye(n, dtype=complex)
    c = np.zeros((n * n, n * n), dtype=complex)
    for j in range(rep.d):
        for op in (position_operator(rep, j), momentum_operator(rep, j)):
            delta = kron(op, eye) - kron(eye, op)
            c += delta @ delta
        ne = _edge_projector(rep, j)
        c += rep.lam * rep.n_basis * (kron(ne, eye) + kron(eye, ne))
    return 0.5 * (c + c.conj().T)


def hermite_values(n_levels: int, u: np.ndarray) -> np.ndarray:
    """Hermite functions h_0..h_{n_levels-1} on points u, shape (len(u), n_levels).

    Standard L2-normalized recurrence; stable for the sizes used here.
    """
    u = np.asarray(u, dtype=float)
    out = np.empty((u.size, n_levels))
    out[:, 0] = np.pi ** -0.25 * np.exp(-0.5 * u ** 2)
    if n_levels > 1:
        out[:, 1] = np.sqrt(2.0) * u * out[:, 0]
    for n in range(1, n_levels - 1):
        out[:, n + 1] = np.sqrt(2.0 / (n + 1)) * u * out[:, n] - np.sqrt(n / (n + 1)) * out[:, n - 1]
    return out


def basis_values(rep: OscillatorRep, x: np.ndarray) -> np.ndarray:
    """Scaled basis functions phi_n(x) on points x (d=1), shape (len(x), n_basis)."""
    if rep.d != 1:
        raise ValidationError("basis_values: d=1 only")
    s = np.sqrt(rep.lam)
    return hermite_values(rep.n_basis, np.asarray(x, dtype=float) / s) / np.sqrt(s)


def fock_tail_mass(k: DensityOperator, rep: OscillatorRep, margin: int = 4) -> float:
    """Population of the top `margin` levels (any axis); truncation health probe."""
    if k.basis_tag != rep.basis_tag:
        raise ValidationError("fock_tail_mass: basis tag mismatch")
    nb, d = rep.n_basis, rep.d
    diag = np.real(np.diag(k.matrix)).reshape((nb,) * d)
    cut = nb - margin
    if d == 1:
        return float(diag[cut:].sum())
    mask = np.zeros((nb, nb), dtype=bool)
    mask[cut:, :] = True
    mask[:, cut:] = True
    return float(diag[mask].sum())
