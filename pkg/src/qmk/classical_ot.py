"""Exact quadratic-cost transport between discrete phase-space measures.

The transport linear program is solved by scipy's HiGHS simplex, which
returns an optimal basic solution; the support of a basic plan is a
spanning forest of the bipartite graph, so the masses are re-derived
exactly from the marginals by leaf elimination.  That polish step makes
plan feasibility exact to accumulation roundoff instead of the LP
solver's 1e-10 working tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import ConvergenceError, ValidationError
from .phasespace import DiscreteMeasure, PhaseSpaceField


@dataclass(frozen=True)
class TransportPlan:
    """Sparse coupling between two discrete measures."""

    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray

    def as_dense(self, shape: tuple[int, int]) -> np.ndarray:
        out = np.zeros(shape)
        out[self.rows, self.cols] = self.mass
        return out


@dataclass(frozen=True)
class W2Result:
    value_sq: float
    plan: TransportPlan
    marginal_residual: float


def _cost_matrix(mu: DiscreteMeasure, nu: DiscreteMeasure) -> np.ndarray:
    d = mu.points[:, None, :] - nu.points[None, :, :]
    return np.sum(d * d, axis=2)


def _forest_polish(rows: np.ndarray, cols: np.ndarray, a: np.ndarray, b: np.ndarray):
    """Re-solve basic masses exactly from the marginals by leaf stripping.

    Returns None when the support is not a forest (degenerate basis); the
    caller then falls back to the LP masses.
    """
    m, n = len(a), len(b)
    need_a, need_b = a.astype(float).copy(), b.astype(float).copy()
    row_deg = np.bincount(rows, minlength=m)
    col_deg = np.bincount(cols, minlength=n)
    alive = np.ones(len(rows), dtype=bool)
    by_row = [[] for _ in range(m)]
    by_col = [[] for _ in range(n)]
    for e, (i, j) in enumerate(zip(rows, cols)):
        by_row[i].append(e)
        by_col[j].append(e)
    mass = np.zeros(len(rows))
    stack = [("r", i) for i in range(m) if row_deg[i] == 1]
    stack += [("c", j) for j in range(n) if col_deg[j] == 1]
    done = 0
    while stack:
        side, k = stack.pop()
        edges = by_row[k] if side == "r" else by_col[k]
        live = [e for e in edges if alive[e]]
        if not live:
            continue
        if len(live) > 1:
            continue  # degree changed since queued; revisit via other endpoint
        e = live[0]
        i, j = rows[e], cols[e]
        w = need_a[i] if side == "r" else need_b[j]
        mass[e] = w
        need_a[i] -= w
        need_b[j] -= w
        alive[e] = False
        done += 1
        row_deg[i] -= 1
        col_deg[j] -= 1
        if row_deg[i] == 1:
            stack.append(("r", i))
        if col_deg[j] == 1:
            stack.append(("c", j))
    if done != len(rows):
        return None  # cycle: not a basic forest
    if mass.min() < -1e-9:
        return None
    return np.maximum(mass, 0.0)


def transport_lp(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[TransportPlan, float]:
    """Solve min <cost, pi> over couplings of weight vectors a and b."""
    m, n = cost.shape
    if abs(a.sum() - b.sum()) > 1e-9:
        raise ValidationError("transport: marginals carry different total mass")
    data = np.ones(2 * m * n)
    row_idx = np.concatenate([np.repeat(np.arange(m), n), m + np.tile(np.arange(n), m)])
    col_idx = np.concatenate([np.arange(m * n), np.arange(m * n)])
    A = sp.csr_matrix((data, (row_idx, col_idx)), shape=(m + n, m * n))
    # presolve misreads atom weights sitting near the feasibility
    # tolerance as infeasible; solving a rescaled copy is equivalent
    scale = float(m + n)
    rhs = np.concatenate([a * scale, b * (scale * a.sum() / b.sum())])
    res = linprog(cost.ravel(), A_eq=A, b_eq=rhs, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise ConvergenceError(f"transport LP failed: {res.message}")
    x = res.x.reshape(m, n) / scale
    keep = x > 1e-11 * max(1.0, x.max())
    rows, cols = np.nonzero(keep)
    mass = x[rows, cols]
    polished = _forest_polish(rows, cols, a, b)
    if polished is not None:
        mass = polished
        nz = mass > 0
        rows, cols, mass = rows[nz], cols[nz], mass[nz]
    plan = TransportPlan(rows, cols, mass)
    return plan, float(mass @ cost[rows, cols])


def w2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> W2Result:
    """Squared quadratic Wasserstein distance between discrete measures."""
    mu, nu = mu.normalized(), nu.normalized()
    cost = _cost_matrix(mu, nu)
    plan, value = transport_lp(cost, mu.weights, nu.weights)
    dense_rows = np.bincount(plan.rows, weights=plan.mass, minlength=len(mu.weights))
    dense_cols = np.bincount(plan.cols, weights=plan.mass, minlength=len(nu.weights))
    residual = max(float(np.max(np.abs(dense_rows - mu.weights))),
                   float(np.max(np.abs(dense_cols - nu.weights))))
    return W2Result(value, plan, residual)


def w2_bruteforce(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Permutation oracle for uniform measures with equal small atom counts."""
    from itertools import permutations

    mu, nu = mu.normalized(), nu.normalized()
    m = len(mu.weights)
    if m != len(nu.weights) or m > 6:
        raise ValidationError("bruteforce: needs equal atom counts <= 6")
    if np.max(np.abs(mu.weights - 1.0 / m)) > 1e-12 or np.max(np.abs(nu.weights - 1.0 / m)) > 1e-12:
        raise ValidationError("bruteforce: uniform weights only")
    cost = _cost_matrix(mu, nu)
    best = np.inf
    for perm in permutations(range(m)):
        best = min(best, sum(cost[i, perm[i]] for i in range(m)) / m)
    return float(best)


def field_to_measure(field: PhaseSpaceField, mass_floor: float = 1e-9,
                     max_atoms: int = 1024) -> DiscreteMeasure:
    """Discretize a nonnegative field: cell centers weighted by cell mass.

    Coarsens by 2x2 block averaging until at most max_atoms cells remain
    after dropping the lightest cells (cumulative dropped mass is kept
    at or below mass_floor), then renormalizes to a probability measure.
    """
    vals = field.values
    if float(vals.min()) < -1e-10:
        raise ValidationError(f"field_to_measure: negative value {vals.min():.3e}")
    vals = np.maximum(vals, 0.0)
    xs, ps = field.grid.xs, field.grid.xis
    cell = field.grid.cell
    while True:
        w = (vals * cell).ravel()
        total = w.sum()
        if total <= 0:
            raise ValidationError("field_to_measure: field carries no mass")
        order = np.argsort(w)
        cum = np.cumsum(w[order])
        # drop the largest prefix of light cells whose mass stays under the floor
        ndrop = int(np.searchsorted(cum, mass_floor * total, side="right"))
        keep = np.ones(w.size, dtype=bool)
        keep[order[:ndrop]] = False
        keep &= w > 0
        if keep.sum() <= max_atoms:
            qq, pp = np.meshgrid(xs, ps, indexing="ij")
            pts = np.column_stack([qq.ravel()[keep], pp.ravel()[keep]])
            return DiscreteMeasure(pts, w[keep]).normalized()
        if vals.shape[0] < 4 or vals.shape[1] < 4:
            raise ValidationError("field_to_measure: cannot coarsen further")
        vals = 0.25 * (vals[0::2, 0::2] + vals[1::2, 0::2] + vals[0::2, 1::2] + vals[1::2, 1::2])
        xs = 0.5 * (xs[0::2] + xs[1::2])
        ps = 0.5 * (ps[0::2] + ps[1::2])
        cell *= 4.0
