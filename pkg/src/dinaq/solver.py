"""Least squares over the probability simplex.

Solves min |M x - beta| subject to x >= 0 and sum(x) = 1 with an active-set
method in the nonnegative-least-squares family: the equality constraint is
eliminated inside each restricted solve (the lowest-index support variable is
expressed through the others), restricted optima with negative coordinates
trigger the usual step-and-drop inner loop, and a variable enters only while
its dual violation is meaningful. Pivoting is deterministic, lowest index
first, so identical inputs produce identical solutions.

The problem is convex, so the certificate in ``kkt_residuals`` (common
gradient multiplier on the support, no profitable coordinate off it) is both
necessary and sufficient for global optimality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEASIBILITY_TOL = 1e-12
KKT_TOL = 1e-8
ZERO_RESIDUAL_TOL = 1e-10

# dual violation a coordinate must show before it may enter the support;
# tighter than KKT_TOL so returned solutions certify with margin
_ENTER_TOL = 1e-10
# support coordinates at or below this after a curtailed step are dropped
_DROP_TOL = 1e-14


@dataclass
class LsqSolution:
    """Solver output: the minimizer, its residual norm, and bookkeeping."""

    x: np.ndarray
    residual: float
    iterations: int
    status: str  # "optimal" or "iteration-cap"


def _restricted_argmin(m: np.ndarray, beta: np.ndarray, support: list[int]) -> np.ndarray:
    # Equality-constrained LS on the support columns: the first support
    # variable is eliminated via z0 = 1 - sum(rest), leaving an unconstrained
    # problem handled by lstsq (minimum-norm on rank deficiency).
    j0 = support[0]
    base = m[:, j0]
    rest = support[1:]
    if not rest:
        return np.array([1.0])
    a = m[:, rest] - base[:, None]
    y, *_ = np.linalg.lstsq(a, beta - base, rcond=None)
    return np.concatenate([[1.0 - y.sum()], y])


def simplex_lsq(
    m_matrix,
    beta,
    *,
    x0=None,
    max_iter: int | None = None,
) -> LsqSolution:
    """Minimize |M x - beta| over the probability simplex.

    Parameters
    ----------
    m_matrix : (r, n) array_like
        Design matrix; must be finite.
    beta : (r,) array_like
        Target vector.
    x0 : (n,) array_like, optional
        Feasible starting point (nonnegative, summing to 1 within 1e-9).
        Defaults to the first vertex. The problem is convex, so the start
        affects the path, never the residual.
    max_iter : int, optional
        Iteration cap, default 50 * n. Hitting it returns the best feasible
        iterate with status "iteration-cap".

    Returns
    -------
    LsqSolution
        x is exactly nonnegative, sums to 1 within 1e-12, and on status
        "optimal" satisfies the simplex KKT conditions at 1e-8.
    """
    m = np.asarray_chkfinite(m_matrix, dtype=np.float64)
    b = np.asarray_chkfinite(beta, dtype=np.float64).ravel()
    if m.ndim != 2:
        raise ValueError("design matrix must be 2-d")
    rows, n = m.shape
    if b.shape != (rows,):
        raise ValueError(f"target has length {b.shape[0]}, design has {rows} rows")
    if n < 1:
        raise ValueError("design matrix needs at least one column")
    if max_iter is None:
        max_iter = 50 * n

    x = np.zeros(n)
    if x0 is None:
        x[0] = 1.0
        support = [0]
    else:
        start = np.asarray_chkfinite(x0, dtype=np.float64).ravel()
        if start.shape != (n,):
            raise ValueError(f"x0 must have length {n}")
        if start.min() < -FEASIBILITY_TOL or abs(start.sum() - 1.0) > 1e-9:
            raise ValueError("x0 must be nonnegative and sum to 1")
        start = np.clip(start, 0.0, None)
        x = start / start.sum()
        support = [int(j) for j in np.flatnonzero(x > 0.0)]
        if not support:
            x[0] = 1.0
            support = [0]

    iterations = 0
    status = "iteration-cap"
    while iterations < max_iter:
        iterations += 1
        z = _restricted_argmin(m, b, support)
        if z.min() <= -FEASIBILITY_TOL:
            # restricted optimum left the simplex: step toward it until the
            # first support coordinate hits zero, then drop what vanished
            xs = x[support]
            neg = z <= 0.0
            ratios = xs[neg] / (xs[neg] - z[neg])
            alpha = ratios.min()
            stepped = xs + alpha * (z - xs)
            keep = stepped > _DROP_TOL
            if keep.all():
                # fp dust kept everything positive; force out the blocker
                blocker = np.flatnonzero(neg)[int(np.argmin(ratios))]
                keep[blocker] = False
            x[:] = 0.0
            kept_idx = [s for s, kp in zip(support, keep) if kp]
            x[kept_idx] = stepped[keep]
            support = kept_idx
            continue

        x[:] = 0.0
        x[support] = np.clip(z, 0.0, None)
        grad = 2.0 * (m.T @ (m @ x - b))
        lam = grad[support].mean()
        off = [j for j in range(n) if j not in set(support)]
        if not off:
            status = "optimal"
            break
        viol = grad[off] - lam
        pick = int(np.argmin(viol))
        if viol[pick] >= -_ENTER_TOL:
            status = "optimal"
            break
        support = sorted(support + [off[pick]])

    x = np.clip(x, 0.0, None)
    x /= x.sum()
    residual = float(np.linalg.norm(m @ x - b))
    return LsqSolution(x=x, residual=residual, iterations=iterations, status=status)


def kkt_residuals(m_matrix, beta, x) -> dict[str, float]:
    """Optimality certificate for a claimed simplex LSQ solution.

    Returns feasibility and stationarity measures:

    * ``sum_error``: |sum(x) - 1|
    * ``min_coord``: smallest coordinate of x
    * ``multiplier``: mean gradient (2 M'(Mx - beta)) over the support
    * ``stationarity_gap``: max |gradient - multiplier| over the support
    * ``dual_gap``: min (gradient - multiplier) off the support (0 when the
      support is everything); optimality requires it to be >= -tolerance
    * ``residual``: |M x - beta|

    A point is optimal (global, by convexity) when sum_error and min_coord
    pass feasibility and the two gaps pass the KKT tolerance.
    """
    m = np.asarray_chkfinite(m_matrix, dtype=np.float64)
    b = np.asarray_chkfinite(beta, dtype=np.float64).ravel()
    xv = np.asarray_chkfinite(x, dtype=np.float64).ravel()
    grad = 2.0 * (m.T @ (m @ xv - b))
    on = xv > 0.0
    lam = float(grad[on].mean()) if on.any() else 0.0
    stationarity = float(np.abs(grad[on] - lam).max()) if on.any() else 0.0
    dual = float((grad[~on] - lam).min()) if (~on).any() else 0.0
    return {
        "sum_error": float(abs(xv.sum() - 1.0)),
        "min_coord": float(xv.min()),
        "multiplier": lam,
        "stationarity_gap": stationarity,
        "dual_gap": dual,
        "residual": float(np.linalg.norm(m @ xv - b)),
    }
