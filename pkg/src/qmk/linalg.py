"""Dense Hermitian linear algebra helpers shared by every module.

All operators are plain complex numpy arrays in an orthonormal basis;
density operators get a light dataclass wrapper that records the basis
they were expressed in.  Validation tolerances are module constants so
every caller agrees on what "Hermitian" and "positive" mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

HERM_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10


def hermitian_defect(a: np.ndarray) -> float:
    """Largest entry of |A - A*| (scale-free for our unit-trace operators)."""
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def require_hermitian(a: np.ndarray, tol: float = HERM_TOL, what: str = "matrix") -> np.ndarray:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{what}: expected square matrix, got shape {a.shape}")
    d = hermitian_defect(a)
    if d > tol:
        raise ValidationError(f"{what}: Hermiticity defect {d:.3e} exceeds {tol:.1e}")
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral decomposition A = V diag(w) V*, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def eig_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> EigenDecomposition:
    """Eigendecomposition with a Hermiticity gate; eigenvalues ascending."""
    h = require_hermitian(a, tol)
    w, v = np.linalg.eigh(h)
    return EigenDecomposition(w, v)


def project_psd(a: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: clip negative eigenvalues to zero."""
    dec = eig_hermitian(a, tol=np.inf)  # caller may pass slightly drifted iterates
    w = np.maximum(dec.eigenvalues, 0.0)
    out = (dec.eigenvectors * w) @ dec.eigenvectors.conj().T
    return 0.5 * (out + out.conj().T)


def partial_trace(q: np.ndarray, dims: tuple[int, int], which: int) -> np.ndarray:
    """Trace out one tensor factor of an operator on H_a (x) H_b.

    which=1 removes the first factor (returns an operator on H_b),
    which=2 removes the second.
    """
    a, b = dims
    if q.shape != (a * b, a * b):
        raise ValidationError(f"partial_trace: shape {q.shape} does not match dims {dims}")
    t = q.reshape(a, b, a, b)
    if which == 2:
        return np.einsum("ikjk->ij", t)
    if which == 1:
        return np.einsum("kikj->ij", t)
    raise ValidationError("partial_trace: which must be 1 or 2")


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product of operators, leftmost factor slowest index."""
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def expm_hermitian_generator(g: np.ndarray, t: float = 1.0, unitarize: bool = True) -> np.ndarray:
    """exp(i t G) for Hermitian G via its eigendecomposition.

    The result of the spectral route is unitary up to roundoff already;
    the optional polar correction re-unitarizes exactly, which keeps
    long conjugation chains from drifting.
    """
    dec = eig_hermitian(g)
    u = (dec.eigenvectors * np.exp(1j * t * dec.eigenvalues)) @ dec.eigenvectors.conj().T
    if unitarize:
        u = polar_unitary(u)
    return u


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary factor of the polar decomposition M = U |M|."""
    u, _, vh = np.linalg.svd(m)
    return u @ vh


@dataclass(frozen=True)
class DensityOperator:
    """Unit-trace PSD operator together with the basis it lives in.

    basis_tag is a plain string (e.g. "osc:l=1:n=24:d=1"); operations that
    mix operators check tags for equality instead of guessing.
    """

    matrix: np.ndarray
    basis_tag: str

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def retag(self, basis_tag: str) -> "DensityOperator":
        return DensityOperator(self.matrix, basis_tag)


def density_from_matrix(matrix: np.ndarray, basis_tag: str, *,
                        psd_tol: float = PSD_TOL, trace_tol: float = TRACE_TOL) -> DensityOperator:
    """Validate and wrap a density matrix.

    Eigenvalue dust in [-psd_tol, 0) is clipped to zero and the trace is
    renormalized; anything worse is a hard error, not a silent repair.
    """
    h = require_hermitian(matrix, what="density")
    tr = float(np.real(np.trace(h)))
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"density: trace {tr!r} differs from 1 by more than {trace_tol:.1e}")
    dec = eig_hermitian(h)
    wmin = float(dec.eigenvalues.min())
    if wmin < -psd_tol:
        raise ValidationError(f"density: negative eigenvalue {wmin:.3e} below -{psd_tol:.1e}")
    if wmin < 0.0:
        w = np.maximum(dec.eigenvalues, 0.0)
        h = (dec.eigenvectors * w) @ dec.eigenvectors.conj().T
        h = 0.5 * (h + h.conj().T)
        h = h / np.real(np.trace(h))
    return DensityOperator(h, basis_tag)


def purity(rho: DensityOperator | np.ndarray) -> float:
    m = rho.matrix if isinstance(rho, DensityOperator) else rho
    return float(np.real(np.trace(m @ m)))
