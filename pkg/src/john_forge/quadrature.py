"""Polar-coordinate quadrature for integrands supported in thin shells.

Integrals over ``R^n`` are written as ``int_S int_0^inf h(s xi) s^{n-1} ds dxi``.
Along each ray the caller supplies breakpoints where the integrand is not
smooth; each piece between consecutive breakpoints gets composite
Gauss-Legendre panels.  In the plane the angular variable is restricted to
the set where the ray meets the support (found by sampling plus bisection)
and split at caller-supplied kink angles, so that narrow supports around
polytope vertices are resolved.  For ``n = 3`` a product rule (Gauss in
``cos(theta)``, trapezoid in ``phi``) is used without support detection.

Resolution is doubled until two successive levels agree to ``rel_tol``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import QuadratureBudgetExceeded

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class QuadConfig:
    ang_panels: int = 8
    rad_panels: int = 1
    order: int = 8
    rel_tol: float = 1e-6
    abs_tol: float = 1e-12
    budget: int = 4_000_000
    support_samples: int = 4096
    max_levels: int = 8

    def refined(self) -> "QuadConfig":
        return replace(self, ang_panels=2 * self.ang_panels, rad_panels=2 * self.rad_panels)


@lru_cache(maxsize=None)
def gauss_legendre(q: int):
    x, w = np.polynomial.legendre.leggauss(q)
    return (x + 1.0) / 2.0, w / 2.0


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("JOHN_FORGE_THREADS", "1")))
    except ValueError:
        return 1


def panel_nodes(a, b, panels: int, order: int):
    """Composite Gauss nodes on ``[a, b]`` (arrays broadcast over leading axes)."""
    t, w = gauss_legendre(order)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    edges = np.linspace(0.0, 1.0, panels + 1)
    loc = (edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * t[None, :]).ravel()
    wts = np.tile(w, panels) / panels
    length = b - a
    return a + length * loc, length * wts


# --- angular rules -----------------------------------------------------------

def _support_edges(psi, theta_grid, iters=60):
    vals = psi(theta_grid)
    pos = vals > 0
    edges = []
    change = np.nonzero(pos[:-1] != pos[1:])[0]
    if change.size:
        lo = theta_grid[change].copy()
        hi = theta_grid[change + 1].copy()
        lo_pos = pos[change]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            mpos = psi(mid) > 0
            same = mpos == lo_pos
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        edges = list(0.5 * (lo + hi))
    return pos, edges


def _sign_changes(fn, grid, floor=1e-12, iters=60):
    """Refined zeros of ``fn`` between grid neighbours of opposite sign.

    Values within ``floor`` of zero are ignored so that an event function
    vanishing identically (e.g. two coincident breakpoints) adds no cuts.
    """
    vals = fn(grid)
    big = np.abs(vals) > floor
    cand = np.nonzero(big[:-1] & big[1:] & ((vals[:-1] > 0) != (vals[1:] > 0)))[0]
    if cand.size == 0:
        return []
    lo, hi = grid[cand].copy(), grid[cand + 1].copy()
    lo_pos = vals[cand] > 0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = (fn(mid) > 0) == lo_pos
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return list(0.5 * (lo + hi))


def circle_pieces(psi, kinks=(), samples: int = 4096, events=()):
    """Sub-intervals of ``[0, 2 pi]`` where ``psi > 0``, split at ``kinks``
    and at sign changes of each function in ``events``."""
    kinks = np.mod(np.asarray(kinks, dtype=float), TWO_PI)
    grid = np.union1d(np.linspace(0.0, TWO_PI, samples + 1), kinks)
    pos, edges = _support_edges(psi, grid)
    if not np.any(pos):
        return []
    cuts = [[0.0, TWO_PI], edges, kinks]
    for ev in events:
        cuts.append(_sign_changes(ev, grid))
    cuts = np.unique(np.concatenate(cuts))
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 1e-15:
            continue
        if psi(np.array([0.5 * (a + b)]))[0] > 0:
            pieces.append((a, b))
    return pieces


def circle_rule(pieces, panels: int, order: int):
    if not pieces:
        return np.zeros((0, 2)), np.zeros(0)
    a = np.array([p[0] for p in pieces])
    b = np.array([p[1] for p in pieces])
    th, w = panel_nodes(a, b, panels, order)
    th, w = th.ravel(), w.ravel()
    return np.column_stack([np.cos(th), np.sin(th)]), w


def sphere_rule(panels: int, order: int):
    """Product rule on ``S^2``: Gauss in ``cos(theta)``, trapezoid in ``phi``."""
    z, wz = panel_nodes(-1.0, 1.0, panels, order)
    nphi = 2 * panels * order
    phi = np.arange(nphi) * (TWO_PI / nphi)
    rho = np.sqrt(1.0 - z * z)
    xi = np.stack([np.outer(rho, np.cos(phi)), np.outer(rho, np.sin(phi)),
                   np.repeat(z[:, None], nphi, axis=1)], axis=-1).reshape(-1, 3)
    w = np.outer(wz, np.full(nphi, TWO_PI / nphi)).ravel()
    return xi, w


# --- polar integration -------------------------------------------------------

@dataclass
class PolarProblem:
    """Everything the integrator needs about one integral.

    ``breaks(xi)`` returns sorted ray breakpoints ``(N, k)``: the integrand
    vanishes outside ``[breaks[:, 0], breaks[:, -1]]`` and is smooth between
    consecutive entries.  ``integrand(s, xi)`` maps radii ``(N, Q)`` to values
    ``(N, Q, *trail)`` and must include the ``s^{n-1}`` Jacobian.
    ``psi(theta)`` is positive exactly where a planar ray meets the support.
    """

    n: int
    breaks: callable
    integrand: callable
    psi: callable | None = None
    kinks: tuple = ()
    events: tuple = ()

    def pieces(self, cfg: "QuadConfig"):
        if self.n != 2:
            return None
        return circle_pieces(self.psi, self.kinks, cfg.support_samples, self.events)


def _ray_integrals(prob: PolarProblem, xi, cfg: QuadConfig):
    br = prob.breaks(xi)
    a, b = br[:, :-1], br[:, 1:]
    s, w = panel_nodes(a, b, cfg.rad_panels, cfg.order)
    N = xi.shape[0]
    s = s.reshape(N, -1)
    w = w.reshape(N, -1)
    vals = prob.integrand(s, xi)
    return np.einsum("nq,nq...->n...", w, vals)


def _angular(prob: PolarProblem, cfg: QuadConfig, pieces):
    if prob.n == 2:
        return circle_rule(pieces, cfg.ang_panels, cfg.order)
    if prob.n == 3:
        return sphere_rule(cfg.ang_panels, cfg.order)
    raise ValueError("polar quadrature supports n = 2 or 3")


def integrate_fixed(prob: PolarProblem, cfg: QuadConfig, pieces=None):
    """Integrate at one fixed resolution."""
    if prob.n == 2 and pieces is None:
        pieces = prob.pieces(cfg)
    xi, wa = _angular(prob, cfg, pieces)
    if xi.shape[0]:
        n_rad = prob.breaks(xi[:1]).shape[1] - 1
        n_eval = xi.shape[0] * n_rad * cfg.rad_panels * cfg.order
        if n_eval > cfg.budget:
            raise QuadratureBudgetExceeded(
                f"{n_eval} integrand evaluations exceed the budget of {cfg.budget}")
    else:
        probe = prob.integrand(np.ones((1, 1)), np.eye(prob.n)[:1])
        return np.zeros(probe.shape[2:])
    threads = _threads()
    if threads > 1 and xi.shape[0] >= 256:
        chunks = np.array_split(np.arange(xi.shape[0]), threads)
        with ThreadPoolExecutor(threads) as ex:
            parts = list(ex.map(lambda idx: np.einsum(
                "n,n...->...", wa[idx], _ray_integrals(prob, xi[idx], cfg)), chunks))
        return sum(parts)
    return np.einsum("n,n...->...", wa, _ray_integrals(prob, xi, cfg))


def integrate(prob: PolarProblem, cfg: QuadConfig | None = None):
    """Refine until two successive levels agree; returns ``(value, error, cfg)``.

    The returned configuration is the finest level used, so later fixed
    evaluations (for example inside an optimizer) can reuse it.
    """
    cfg = cfg or QuadConfig()
    pieces = prob.pieces(cfg)
    prev = integrate_fixed(prob, cfg, pieces)
    for _ in range(cfg.max_levels):
        cfg = cfg.refined()
        cur = integrate_fixed(prob, cfg, pieces)
        err = float(np.max(np.abs(np.asarray(cur) - prev)))
        scale = float(np.max(np.abs(cur)))
        if err <= max(cfg.rel_tol * scale, cfg.abs_tol):
            return cur, err, cfg
        prev = cur
    raise QuadratureBudgetExceeded("refinement did not reach the requested tolerance")
