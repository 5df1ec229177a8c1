"""Dense two-phase simplex method with Bland's anti-cycling rule.

Problems here are tiny (a few dozen rows and columns), so a plain tableau
implementation is fast enough and keeps the package free of LP solver
dependencies.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaxPivots

PIVOT_TOL = 1e-11


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    fun: float | None
    pivots: int


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]


def _run(T, basis, ncols, max_pivots, pivots, tol):
    """Iterate on tableau ``T`` whose last row holds reduced costs.

    Only the first ``ncols`` columns may enter the basis.
    """
    m = T.shape[0] - 1
    while True:
        cost = T[-1, :ncols]
        entering = -1
        for j in range(ncols):
            if cost[j] < -tol:
                entering = j
                break
        if entering < 0:
            return "optimal", pivots
        column = T[:m, entering]
        best = None
        leave = -1
        for i in range(m):
            if column[i] > tol:
                ratio = T[i, -1] / column[i]
                if (best is None or ratio < best - tol
                        or (abs(ratio - best) <= tol and basis[i] < basis[leave])):
                    best = ratio
                    leave = i
        if leave < 0:
            return "unbounded", pivots
        _pivot(T, leave, entering)
        basis[leave] = entering
        pivots += 1
        if pivots > max_pivots:
            raise MaxPivots(f"simplex exceeded {max_pivots} pivots")


def linprog_eq(c, A_eq, b_eq, max_pivots: int = 20000,
               tol: float = PIVOT_TOL) -> LPResult:
    """Solve ``min c.x  s.t.  A_eq x = b_eq, x >= 0``."""
    c = np.asarray(c, dtype=float).ravel()
    A = np.array(A_eq, dtype=float, ndmin=2)
    b = np.array(b_eq, dtype=float).ravel()
    m, nv = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: artificial slack per row
    T = np.zeros((m + 1, nv + m + 1))
    T[:m, :nv] = A
    T[:m, nv:nv + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :nv] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(nv, nv + m))
    status, pivots = _run(T, basis, nv + m, max_pivots, 0, tol)
    if -T[-1, -1] > 1e3 * tol * max(1.0, b.sum()):
        return LPResult("infeasible", None, None, pivots)

    # drive artificials out of the basis, dropping redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= nv:
            nz = np.nonzero(np.abs(T[i, :nv]) > tol)[0]
            if nz.size == 0:
                continue
            _pivot(T, i, int(nz[0]))
            pivots += 1
            basis[i] = int(nz[0])
        keep.append(i)
    T2 = np.zeros((len(keep) + 1, nv + 1))
    T2[:-1, :nv] = T[keep, :nv]
    T2[:-1, -1] = T[keep, -1]
    basis = [basis[i] for i in keep]

    # phase 2 reduced costs
    T2[-1, :nv] = c
    for i, j in enumerate(basis):
        if T2[-1, j] != 0.0:
            T2[-1] -= T2[-1, j] * T2[i]
    status, pivots = _run(T2, basis, nv, max_pivots, pivots, tol)
    if status == "unbounded":
        return LPResult("unbounded", None, None, pivots)
    x = np.zeros(nv)
    for i, j in enumerate(basis):
        x[j] = T2[i, -1]
    x = np.maximum(x, 0.0)
    return LPResult("optimal", x, float(c @ x), pivots)


def max_min_weight(a, max_pivots: int = 20000):
    """Largest ``t`` such that ``sum l_i a_i = 0, sum l_i = 1, l_i >= t``.

    Returns ``(t, weights)``, or ``(None, None)`` when the origin is not in
    the affine hull of the rows of ``a``.
    """
    a = np.asarray(a, dtype=float)
    m, d = a.shape
    # variables: mu_1..mu_m, t+, t-   with  l_i = mu_i + t
    s = a.sum(axis=0)
    A = np.zeros((d + 1, m + 2))
    A[:d, :m] = a.T
    A[:d, m] = s
    A[:d, m + 1] = -s
    A[d, :m] = 1.0
    A[d, m] = m
    A[d, m + 1] = -m
    b = np.zeros(d + 1)
    b[d] = 1.0
    c = np.zeros(m + 2)
    c[m] = -1.0
    c[m + 1] = 1.0
    res = linprog_eq(c, A, b, max_pivots=max_pivots)
    if res.status != "optimal":
        return None, None
    t = res.x[m] - res.x[m + 1]
    return float(t), res.x[:m] + t


def separating_direction(a, max_pivots: int = 20000):
    """Find ``y`` with ``a_i . y <= -1`` for all rows, minimizing ``|y|_1``.

    Returns ``None`` when no such ``y`` exists, i.e. when the origin lies in
    the convex hull of the rows.
    """
    a = np.asarray(a, dtype=float)
    m, d = a.shape
    # variables: y+, y-, slack
    A = np.hstack([-a, a, -np.eye(m)])
    b = np.ones(m)
    c = np.concatenate([np.ones(2 * d), np.zeros(m)])
    res = linprog_eq(c, A, b, max_pivots=max_pivots)
    if res.status != "optimal":
        return None
    return res.x[:d] - res.x[d:2 * d]
