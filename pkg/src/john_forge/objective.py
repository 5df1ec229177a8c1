"""The convex functional ``I_c(M, w) = sum_i F(<xi_i, M xi_i + w>)`` and friends.

Points of ``sym_0 x R^n`` are handled either as :class:`SymPair` or in flat
chart coordinates.  In the chart, ``<xi, M xi + w> = v_xi . x`` where
``v_xi`` stacks the ``sym_0`` coordinates of ``xi xi^T`` and ``xi`` itself,
so the objective is ``sum_i F(V x)_i`` for a fixed design matrix ``V``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp import max_min_weight, separating_direction
from .loewner import ContactSet
from .symspace import (SymPair, chart_dim, coords_to_pair, pair_to_coords,
                       sym0_coords)

INTERIOR_TOL = 1e-9


class ObjectiveF:
    """Scalar profile ``F`` with first and second derivatives (vectorized)."""

    name = ""

    def value(self, x):
        raise NotImplementedError

    def d1(self, x):
        raise NotImplementedError

    def d2(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)

    def check_hypotheses(self, lo=-6.0, hi=6.0, num=4001) -> dict:
        """Grid check: F >= 0, non-decreasing, convex, strictly convex on [0, inf), F'(0) > 0."""
        x = np.linspace(lo, hi, num)
        y = self.value(x)
        dy = np.diff(y)
        second = y[2:] - 2 * y[1:-1] + y[:-2]
        tol = 1e-12 * max(1.0, float(np.max(np.abs(y))))
        right = x[1:-1] >= 0
        return {
            "nonnegative": bool(np.all(y >= 0)),
            "nondecreasing": bool(np.all(dy >= -tol)),
            "convex": bool(np.all(second >= -tol)),
            "strictly_convex_right": bool(np.all(second[right] > 0)),
            "positive_slope_at_zero": bool(self.d1(0.0) > 0),
        }

    def __repr__(self):
        return f"{type(self).__name__}()"


class ExpF(ObjectiveF):
    name = "exp"

    def value(self, x):
        return np.exp(x)

    d1 = value
    d2 = value


class PaperConvF(ObjectiveF):
    """``F = f * gbar`` for ``f(t) = (t+1)_+`` and the ramp ``g``.

    Closed form: ``0`` for ``x <= -2``, ``(x+2)^3 / 12`` on ``(-2, 0)`` and
    ``x^2/2 + x + 2/3`` for ``x >= 0``; the pieces agree to second order.
    """

    name = "paperconv"

    def value(self, x):
        x = np.asarray(x, dtype=float)
        mid = (x + 2.0) ** 3 / 12.0
        right = 0.5 * x * x + x + 2.0 / 3.0
        return np.where(x <= -2.0, 0.0, np.where(x < 0.0, mid, right))

    def d1(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= -2.0, 0.0, np.where(x < 0.0, (x + 2.0) ** 2 / 4.0, x + 1.0))

    def d2(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x <= -2.0, 0.0, np.where(x < 0.0, (x + 2.0) / 2.0, 1.0))


class ShiftedSquareF(ObjectiveF):
    """``F(x) = ((x + 1)_+)^2``."""

    name = "shiftedsquare"

    def value(self, x):
        return np.maximum(np.asarray(x, dtype=float) + 1.0, 0.0) ** 2

    def d1(self, x):
        return 2.0 * np.maximum(np.asarray(x, dtype=float) + 1.0, 0.0)

    def d2(self, x):
        return np.where(np.asarray(x, dtype=float) > -1.0, 2.0, 0.0)


class ScaledF(ObjectiveF):
    """``c * F`` for a positive constant ``c``."""

    def __init__(self, base: ObjectiveF, scale: float):
        self.base = base
        self.scale = float(scale)
        self.name = f"{scale}*{base.name}"

    def value(self, x):
        return self.scale * self.base.value(x)

    def d1(self, x):
        return self.scale * self.base.d1(x)

    def d2(self, x):
        return self.scale * self.base.d2(x)


F_VARIANTS = {"exp": ExpF, "paperconv": PaperConvF, "shiftedsquare": ShiftedSquareF}


def get_F(name: str) -> ObjectiveF:
    try:
        return F_VARIANTS[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown F variant {name!r}; choose from {sorted(F_VARIANTS)}") from None


def F_eval(F: ObjectiveF, x):
    return F.value(x)


def F_prime(F: ObjectiveF, x):
    return F.d1(x)


def design_matrix(points) -> np.ndarray:
    """Rows ``(sym0 coords of xi xi^T, xi)``: chart coordinates of each point."""
    xi = np.asarray(points, dtype=float)
    outer = np.einsum("mi,mj->mij", xi, xi)
    return np.hstack([sym0_coords(outer), xi])


@dataclass
class DiscreteMeasureProblem:
    """Counting measure on finitely many unit vectors, with a profile ``F``."""

    points: np.ndarray
    F: ObjectiveF = field(default_factory=ExpF)

    def __post_init__(self):
        if isinstance(self.points, ContactSet):
            self.points = self.points.points
        pts = np.array(self.points, dtype=float, ndmin=2)
        if np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > 1e-10:
            raise ValueError("contact points must be unit vectors")
        self.points = pts
        self.V = design_matrix(pts)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def dim(self) -> int:
        return chart_dim(self.n)

    # chart-coordinate evaluations
    def args(self, x):
        return self.V @ x

    def value(self, x) -> float:
        return float(np.sum(self.F.value(self.V @ x)))

    def grad(self, x) -> np.ndarray:
        return self.V.T @ self.F.d1(self.V @ x)

    def hess(self, x) -> np.ndarray:
        return (self.V.T * self.F.d2(self.V @ x)) @ self.V


def _coords(prob, p):
    if isinstance(p, SymPair):
        return pair_to_coords(p, tol=1e-10)
    return np.asarray(p, dtype=float)


def I_c(prob: DiscreteMeasureProblem, p) -> float:
    if isinstance(p, SymPair):
        if abs(p.trace()) > 1e-10:
            raise ValueError("matrix part must be traceless")
        t = np.einsum("mi,ij,mj->m", prob.points, p.M, prob.points) + prob.points @ p.w
        return float(np.sum(prob.F.value(t)))
    return prob.value(_coords(prob, p))


def grad_I_c(prob: DiscreteMeasureProblem, p, project: bool = False) -> SymPair:
    """Gradient ``sum_i F'(<xi_i, M xi_i + w>) (xi_i xi_i^T, xi_i)`` in ``sym x R^n``.

    With ``project=True`` the matrix part is projected onto ``sym_0``.
    """
    if not isinstance(p, SymPair):
        p = coords_to_pair(p, prob.n)
    xi = prob.points
    t = np.einsum("mi,ij,mj->m", xi, p.M, xi) + xi @ p.w
    c = prob.F.d1(t)
    g = SymPair(np.einsum("m,mi,mj->ij", c, xi, xi), c @ xi)
    return g.project_traceless() if project else g


def hessian_I_c(prob: DiscreteMeasureProblem, p) -> np.ndarray:
    """Hessian in chart coordinates, shape ``(d, d)``."""
    return prob.hess(_coords(prob, p))


@dataclass
class SolvabilityResult:
    status: str  # "Interior" | "Boundary" | "Outside"
    t_star: float | None
    rank: int
    weights: np.ndarray | None = None
    witness: SymPair | None = None
    null_direction: SymPair | None = None

    @property
    def interior(self) -> bool:
        return self.status == "Interior"

    def to_json(self) -> dict:
        out = {"status": self.status, "t_star": self.t_star, "rank": self.rank}
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        for key in ("witness", "null_direction"):
            pair = getattr(self, key)
            if pair is not None:
                out[key] = {"M": pair.M.tolist(), "w": pair.w.tolist()}
        return out


def solvability_check(contacts, tol: float = INTERIOR_TOL) -> SolvabilityResult:
    """Decide whether ``(I/n, 0)`` is interior to ``co{(xi xi^T, xi)}``.

    Works with ``a_i = (xi xi^T - I/n, xi)`` in chart coordinates: the point
    is interior iff the ``a_i`` span the chart space and the origin is a
    convex combination of them with all weights strictly positive.
    """
    pts = contacts.points if isinstance(contacts, ContactSet) else np.asarray(contacts, dtype=float)
    pts = np.array(pts, dtype=float, ndmin=2)
    n = pts.shape[1]
    a = design_matrix(pts)
    d = a.shape[1]
    sv = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(sv > tol))
    t, lam = max_min_weight(a)
    null = None
    if rank < d:
        _, _, vt = np.linalg.svd(a)
        null = coords_to_pair(vt[-1], n)
    if t is None or t < -tol:
        y = separating_direction(a)
        witness = coords_to_pair(y, n) if y is not None else None
        return SolvabilityResult("Outside", t, rank, None, witness, null)
    status = "Interior" if (t > tol and rank == d) else "Boundary"
    return SolvabilityResult(status, t, rank, lam, None, null)
