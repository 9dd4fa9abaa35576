"""Independent oracles and generators used by the verification suites.

Nothing here shares iteration machinery with the production solver: the
SDP oracle below is a log-det barrier interior-point method on an
explicit parameterization of the marginal-constraint nullspace, usable
for doubled dimensions up to about 9 where forming the dense Newton
system is trivial.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, ValidationError
from .linalg import DensityOperator, partial_trace


def random_density(dim: int, rank: int | None = None, seed: int = 0,
                   basis_tag: str = "raw") -> DensityOperator:
    """Ginibre-style density: G G* normalized, spectrum floored at 1e-8."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValidationError(f"random_density: rank {rank} out of range for dim {dim}")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    a = g @ g.conj().T
    a = a / np.real(np.trace(a))
    if rank == dim:
        a = (1.0 - 1e-8) * a + (1e-8 / dim) * np.eye(dim)
    a = 0.5 * (a + a.conj().T)
    return DensityOperator(a, basis_tag)


def random_measure(m: int, seed: int = 0, spread: float = 2.0):
    """Random discrete probability measure with m atoms in a spread-sized box."""
    from .phasespace import DiscreteMeasure

    rng = np.random.default_rng(seed)
    pts = rng.uniform(-spread, spread, size=(m, 2))
    w = rng.uniform(0.2, 1.0, size=m)
    return DiscreteMeasure(pts, w / w.sum())


def _herm_basis(n: int) -> list[np.ndarray]:
    """Orthonormal real basis of Hermitian n x n matrices (Frobenius)."""
    out = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        out.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[i, j] = s[j, i] = 1.0 / np.sqrt(2.0)
            out.append(s)
            a = np.zeros((n, n), dtype=complex)
            a[i, j] = 1j / np.sqrt(2.0)
            a[j, i] = -1j / np.sqrt(2.0)
            out.append(a)
    return out


def _nullspace_basis(na: int, nb: int) -> list[np.ndarray]:
    """Hermitian directions H on the doubled space with both partial traces zero."""
    n = na * nb
    cand = []
    for h in _herm_basis(n):
        e1 = partial_trace(h, (na, nb), 2)
        e2 = partial_trace(h, (na, nb), 1)
        t = 0.5 * np.real(np.trace(e1) + np.trace(e2))
        y1 = (e1 - (t / (2.0 * na)) * np.eye(na)) / nb
        y2 = (e2 - (t / (2.0 * nb)) * np.eye(nb)) / na
        proj = h - np.kron(y1, np.eye(nb)) - np.kron(np.eye(na), y2)
        cand.append(proj.ravel())
    m = np.array(cand).T  # (n^2, n^2) complex columns
    stacked = np.vstack([m.real, m.imag])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    keep = s > 1e-9 * s[0]
    basis = []
    for k in range(int(keep.sum())):
        v = (u[: n * n, k] + 1j * u[n * n:, k]).reshape(n, n)
        v = 0.5 * (v + v.conj().T)
        v = v / np.linalg.norm(v)
        basis.append(v)
    return basis


def brute_force_sdp(ka: np.ndarray, kb: np.ndarray, cost: np.ndarray,
                    gap_tol: float = 1e-9) -> tuple[float, float]:
    """Barrier interior-point solve of the coupling SDP; returns (value, gap).

    Path following on f_mu(Q) = <C, Q> - mu log det Q over the affine
    marginal set, ten mu steps per decade; at a centered point mu * dim
    certifies the duality gap, so the returned value is optimal to `gap`.
    """
    na, nb = ka.shape[0], kb.shape[0]
    n = na * nb
    if n > 9:
        raise ValidationError("brute_force_sdp: doubled dimension must be <= 9")
    wa = np.linalg.eigvalsh(0.5 * (ka + ka.conj().T))
    wb = np.linalg.eigvalsh(0.5 * (kb + kb.conj().T))
    if wa[0] <= 0 or wb[0] <= 0:
        raise ValidationError("brute_force_sdp: marginals must be strictly positive definite")
    basis = _nullspace_basis(na, nb)
    q0 = np.kron(ka, kb)
    cvec = np.array([np.real(np.trace(cost @ b)) for b in basis])

    def assemble(theta):
        q = q0.copy()
        for t, b in zip(theta, basis):
            q = q + t * b
        return q

    theta = np.zeros(len(basis))
    mu = max(1.0, float(np.real(np.trace(q0 @ cost))) / n)
    mu_min = gap_tol / (2.0 * n)
    shrink = 10.0 ** (-0.1)
    while mu > mu_min:
        for _ in range(8):
            q = assemble(theta)
            w, v = np.linalg.eigh(q)
            if w[0] <= 0:
                raise ConvergenceError("brute_force_sdp: iterate left the cone")
            qinv = (v / w) @ v.conj().T
            grad = cvec - mu * np.array([np.real(np.trace(qinv @ b)) for b in basis])
            mb = [qinv @ b for b in basis]
            hess = mu * np.array([[np.real(np.trace(mb[i] @ mb[j]))
                                   for j in range(len(basis))] for i in range(len(basis))])
            try:
                step = np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(hess, grad, rcond=None)[0]
            decrement = float(grad @ step)
            t = 1.0
            for _ in range(40):
                trial = assemble(theta - t * step)
                if np.linalg.eigvalsh(trial)[0] > 0:
                    break
                t *= 0.5
            else:
                raise ConvergenceError("brute_force_sdp: line search failed")
            theta = theta - t * step
            if decrement < 1e-12:
                break
        mu *= shrink
    q = assemble(theta)
    value = float(np.real(np.trace(q @ cost)))
    return value, mu * n / shrink


def transport_lp_on_spectra(ka_diag: np.ndarray, kb_diag: np.ndarray,
                            cost_diag: np.ndarray) -> float:
    """Classical transport value over diagonal couplings of diagonal marginals."""
    import scipy.sparse as sp
    from scipy.optimize import linprog

    m, n = len(ka_diag), len(kb_diag)
    c = cost_diag.reshape(m, n)
    data = np.ones(2 * m * n)
    rows = np.concatenate([np.repeat(np.arange(m), n), m + np.tile(np.arange(n), m)])
    cols = np.concatenate([np.arange(m * n), np.arange(m * n)])
    A = sp.csr_matrix((data, (rows, cols)), shape=(m + n, m * n))
    res = linprog(c.ravel(), A_eq=A, b_eq=np.concatenate([ka_diag, kb_diag]), method="highs")
    if res.status != 0:
        raise ConvergenceError(f"spectra LP failed: {res.message}")
    return float(res.fun)


def quadrature_moment(field, fx=0, fxi=0) -> float:
    """Grid moment integral x^fx xi^fxi f(x, xi) dx dxi."""
    xs, xis = field.grid.xs, field.grid.xis
    wx = xs ** fx if fx else np.ones_like(xs)
    wxi = xis ** fxi if fxi else np.ones_like(xis)
    return float(wx @ field.values @ wxi * field.grid.cell)
