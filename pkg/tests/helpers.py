"""Fixtures and independent oracles shared by the test modules."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from john_forge.objective import design_matrix


def cross_polytope(n):
    return np.vstack([np.eye(n), -np.eye(n)])


def regular_simplex(n):
    """``n + 1`` unit vectors with centroid 0."""
    E = np.eye(n + 1) - 1.0 / (n + 1)
    # orthonormal basis of the hyperplane sum(x) = 0
    U, _, _ = np.linalg.svd(E)
    pts = E @ U[:, :n]
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def simplex_hpoly(n):
    from john_forge.body import HPolytope
    return HPolytope(-regular_simplex(n), np.full(n + 1, 1.0 / n))


def regular_polygon(m, phase=0.3):
    a = phase + 2 * np.pi * np.arange(m) / m
    return np.column_stack([np.cos(a), np.sin(a)])


def random_unit(rng, m, n):
    x = rng.normal(size=(m, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def lp_max_min_weight(points):
    """``max t`` with ``sum l a_i = 0, sum l = 1, l >= t`` by scipy's HiGHS."""
    a = design_matrix(points)
    m, d = a.shape
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A_eq = np.zeros((d + 1, m + 1))
    A_eq[:d, :m] = a.T
    A_eq[d, :m] = 1.0
    b_eq = np.zeros(d + 1)
    b_eq[d] = 1.0
    A_ub = np.hstack([-np.eye(m), np.ones((m, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=b_eq,
                  bounds=[(None, None)] * (m + 1), method="highs")
    return -res.fun if res.status == 0 else None


def interior_config(rng, n, margin=1e-3):
    """Random contact set that admits strictly positive isotropic weights."""
    d = n * (n + 3) // 2 - 1
    while True:
        pts = random_unit(rng, 2 * d + 2, n)
        t = lp_max_min_weight(pts)
        if t is not None and t > margin and np.linalg.matrix_rank(design_matrix(pts)) == d:
            return pts


def hemisphere_config(rng, n, m=None):
    """Points in an open hemisphere: no centered isotropic measure exists."""
    e = random_unit(rng, 1, n)[0]
    m = m or 2 * n + 2
    pts = random_unit(rng, 4 * m, n)
    pts = pts[pts @ e > 0.05][:m]
    return pts


def random_sym(rng, n, scale=1.0, traceless=False):
    M = rng.normal(size=(n, n))
    M = 0.5 * (M + M.T)
    if traceless:
        M -= np.trace(M) / n * np.eye(n)
    return scale * M


def conv_oracle(x, num=20001):
    """``int f(t) g(t - x) dt`` by the trapezoid rule on kink-aligned pieces."""
    from john_forge.flow import f_profile, g_profile
    lo, hi = -1.0, x + 1.0
    if hi <= lo:
        return 0.0
    cuts = sorted({lo, hi, min(max(x - 1.0, lo), hi)})
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            t = np.linspace(a, b, num)
            total += np.trapezoid(f_profile(t) * g_profile(t - x), t)
    return total
