"""Minimum-volume enclosing ellipsoids, Löwner position and contact points."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .body import (ConvexBody, HPolytope, LinearImage, PNormBall, UnitBall,
                   VPolytope, is_polytope, polytope_vertices, transform)
from .errors import DegenerateInput, MaxIterations, TooFewContacts

MAX_ITER = 10**6
SUPPORT_FACTOR = 1e-6


@dataclass(frozen=True)
class Ellipsoid:
    """``{x : (x - c)^T Q (x - c) <= 1}`` with ``Q`` symmetric positive-definite."""

    Q: np.ndarray
    center: np.ndarray
    weights: np.ndarray | None = None
    iterations: int = 0

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        Q = 0.5 * (Q + Q.T)
        if np.linalg.eigvalsh(Q)[0] <= 0:
            raise ValueError("ellipsoid shape matrix must be positive-definite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "center", np.array(self.center, dtype=float).ravel())

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def values(self, points) -> np.ndarray:
        d = np.asarray(points, dtype=float) - self.center
        return np.einsum("...i,ij,...j->...", d, self.Q, d)

    def contains(self, points, eps: float = 0.0) -> bool:
        return bool(np.all(self.values(points) <= 1.0 + eps))

    def support(self, threshold: float | None = None) -> np.ndarray:
        """Indices of points carrying dual weight above ``threshold``."""
        if self.weights is None:
            return np.zeros(0, dtype=int)
        if threshold is None:
            threshold = SUPPORT_FACTOR / len(self.weights)
        return np.nonzero(self.weights > threshold)[0]

    def volume_factor(self) -> float:
        """``det(Q)^{-1/2}``, proportional to the volume."""
        return float(np.linalg.det(self.Q) ** -0.5)

    def to_json(self) -> dict:
        return {"Q": self.Q.tolist(), "center": self.center.tolist()}


def mvee(points, eps: float = 1e-9, max_iter: int = MAX_ITER) -> Ellipsoid:
    """Minimum-volume enclosing ellipsoid by Khachiyan's barycentric ascent.

    Uses the Todd-Yildirim away steps, which drop weight from interior points
    and give linear convergence.  Iteration stops once every point satisfies
    ``(p - c)^T Q (p - c) <= 1 + eps`` and every point carrying dual weight
    is within ``eps`` of the boundary.  ``Q`` is finally rescaled so that the
    farthest point lies exactly on the boundary.
    """
    P = np.array(points, dtype=float, ndmin=2)
    m, n = P.shape
    if not 0 < eps <= 0.1:
        raise ValueError("eps must lie in (0, 0.1]")
    if m < n + 1 or np.linalg.matrix_rank(P - P.mean(axis=0), tol=1e-10 * max(1.0, np.abs(P).max())) < n:
        raise DegenerateInput("points do not affinely span the space")
    q = np.hstack([P, np.ones((m, 1))])
    u = np.full(m, 1.0 / m)
    half = 0.5 * eps
    for it in range(max_iter + 1):
        X = q.T @ (u[:, None] * q)
        omega = np.einsum("ij,jk,ik->i", q, np.linalg.inv(X), q)
        # (p - c)^T Q (p - c) = (omega - 1) / n  with  Q = Sigma^{-1} / n
        val = (omega - 1.0) / n
        j = int(np.argmax(val))
        live = u > 0
        k = int(np.flatnonzero(live)[np.argmin(val[live])])
        eps_plus = val[j] - 1.0
        eps_minus = 1.0 - val[k]
        if eps_plus <= half and eps_minus <= half:
            break
        if it == max_iter:
            raise MaxIterations(f"mvee did not converge in {max_iter} iterations")
        if eps_plus >= eps_minus:
            beta = (omega[j] - (n + 1)) / ((n + 1) * (omega[j] - 1.0))
            u *= 1.0 - beta
            u[j] += beta
        else:
            beta = (n + 1 - omega[k]) / ((n + 1) * (omega[k] - 1.0))
            if u[k] < 1.0:
                beta = min(beta, u[k] / (1.0 - u[k]))
            u *= 1.0 + beta
            u[k] -= beta
            if u[k] < 1e-300:
                u[k] = 0.0
    c = u @ P
    D = P - c
    Sigma = D.T @ (u[:, None] * D)
    Q = np.linalg.inv(Sigma) / n
    vals = np.einsum("ij,jk,ik->i", D, Q, D)
    Q = Q / vals.max()
    return Ellipsoid(Q, c, weights=u, iterations=it)


def _spd_sqrt(Q):
    w, V = np.linalg.eigh(Q)
    return (V * np.sqrt(w)) @ V.T


def to_loewner(body: ConvexBody, eps: float = 1e-9):
    """Return ``(A K + v, A, v)`` with ``A K + v`` in Löwner position.

    ``A`` is the symmetric positive-definite square root of the MVEE shape
    matrix, which fixes the orthogonal ambiguity of the position.
    """
    n = body.n
    if isinstance(body, UnitBall):
        return body, np.eye(n), np.zeros(n)
    if isinstance(body, PNormBall):
        R = body.loewner_radius()
        return PNormBall(body.p, body.radius / R, n), np.eye(n) / R, np.zeros(n)
    if not is_polytope(body):
        raise ValueError("smooth bodies other than balls must be supplied in Löwner position")
    E = mvee(polytope_vertices(body), eps)
    A = _spd_sqrt(E.Q)
    v = -A @ E.center
    if isinstance(body, LinearImage):
        base = body.base
        moved = transform(base, A @ body.A, v)
    else:
        moved = transform(body, A, v)
    return moved, A, v


@dataclass(frozen=True)
class ContactSet:
    """Unit vectors in ``S^{n-1} ∩ ∂K``; ``full_sphere`` marks ``K`` = unit ball."""

    points: np.ndarray
    tol: float
    source: str = ""
    full_sphere: bool = False
    n: int = field(default=0)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, self.n or np.shape(self.points)[-1])
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "n", pts.shape[1])

    def __len__(self):
        return len(self.points)

    def to_json(self) -> dict:
        out = {"points": self.points.tolist(), "tol": self.tol}
        if self.full_sphere:
            out["full_sphere"] = True
        return out

    @classmethod
    def from_json(cls, d: dict) -> "ContactSet":
        pts = np.array(d["points"], dtype=float)
        norms = np.linalg.norm(pts, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-10:
            raise ValueError("contact points must have unit length")
        return cls(pts / norms[:, None], float(d.get("tol", 0.0)), "json")


def _pnorm_contacts(body: PNormBall):
    n = body.n
    if body.p > 2.0:
        pts = np.array(list(itertools.product([-1.0, 1.0], repeat=n))) / np.sqrt(n)
    else:
        pts = np.vstack([np.eye(n), -np.eye(n)])
    return pts


def contact_points(body: ConvexBody, tol: float = 1e-6) -> ContactSet:
    """Contact points of a body in Löwner position with the unit sphere."""
    n = body.n
    if isinstance(body, UnitBall) or (isinstance(body, PNormBall) and body.p == 2.0
                                      and abs(body.radius - 1.0) <= tol):
        return ContactSet(np.zeros((0, n)), tol, repr(body), full_sphere=True, n=n)
    if isinstance(body, PNormBall):
        if abs(body.loewner_radius() - 1.0) > tol:
            raise ValueError("body is not in Löwner position")
        pts = _pnorm_contacts(body)
    elif is_polytope(body):
        verts = polytope_vertices(body)
        norms = np.linalg.norm(verts, axis=1)
        if np.any(norms > 1.0 + tol):
            raise ValueError("body is not inside the unit ball; position it first")
        near = np.abs(norms - 1.0) <= tol
        pts = verts[near] / norms[near, None]
    else:
        raise ValueError(f"cannot extract contact points of {body!r}")
    if len(pts) < n + 1:
        raise TooFewContacts(f"found {len(pts)} contact points, need at least {n + 1}")
    return ContactSet(pts, tol, repr(body), n=n)
