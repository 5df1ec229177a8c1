"""Convex bodies containing the origin in their interior.

Every body exposes its gauge (Minkowski functional)
``|x|_K = inf{t > 0 : x in tK}``, the outward unit normal field extended to
``R^n \\ {0}`` by 0-homogeneity, and the sublevel interval of the gauge along
an affine ray, which the quadrature code uses to split radial integrals at
the points where the integrand is not smooth.

All evaluations are vectorized over leading axes.
"""
from __future__ import annotations

import itertools

import numpy as np

from .errors import (AmbiguousNormal, DegenerateHull, DimensionMismatch,
                     OriginNotInterior, SingularTransform)
from .lp import max_min_weight

NORMAL_TOL = 1e-10
TIE_TOL = 1e-10
HULL_TOL = 1e-9


def _empty_interval(shape):
    return np.full(shape, np.inf), np.full(shape, -np.inf)


class ConvexBody:
    """Common interface; subclasses implement the gauge and its companions."""

    n: int
    smooth: bool = False

    def gauge(self, x) -> np.ndarray:
        raise NotImplementedError

    def normal(self, x) -> np.ndarray:
        raise NotImplementedError

    def ray_level_interval(self, p, d, c):
        """Return ``(lo, hi)`` with ``{s : gauge(p + s d) <= c} = [lo, hi]``."""
        raise NotImplementedError

    def kink_directions(self) -> np.ndarray:
        """Unit directions along which the gauge fails to be smooth (2-D use)."""
        return np.zeros((0, self.n))

    def to_json(self) -> dict:
        raise NotImplementedError

    def _check_dim(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise DimensionMismatch(f"expected trailing dimension {self.n}, got {x.shape}")
        return x


class HPolytope(ConvexBody):
    """Polytope ``{x : <u_j, x> <= h_j}`` with unit normals and positive offsets."""

    def __init__(self, normals, offsets):
        u = np.array(normals, dtype=float, ndmin=2)
        h = np.array(offsets, dtype=float).ravel()
        if u.shape[0] != h.shape[0]:
            raise DimensionMismatch("normals and offsets have different lengths")
        if np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0)) > NORMAL_TOL:
            raise ValueError("facet normals must have unit Euclidean norm")
        if np.any(h <= 0):
            raise OriginNotInterior("all facet offsets must be positive")
        self.n = u.shape[1]
        if self.n < 2:
            raise DimensionMismatch("dimension must be at least 2")
        if np.linalg.matrix_rank(u) < self.n:
            raise DegenerateHull("facet normals do not span the space: unbounded polytope")
        t, _ = max_min_weight(u)
        if t is None or t <= 1e-12:
            raise DegenerateHull("facet normals do not positively span: unbounded polytope")
        self.normals = u
        self.offsets = h
        self._scaled = u / h[:, None]
        self._vertices = None

    @classmethod
    def from_inequalities(cls, a, b) -> "HPolytope":
        """Build from ``a x <= b`` with arbitrary (nonzero) row scaling."""
        a = np.array(a, dtype=float, ndmin=2)
        b = np.array(b, dtype=float).ravel()
        norms = np.linalg.norm(a, axis=1)
        return cls(a / norms[:, None], b / norms)

    def gauge(self, x):
        x = self._check_dim(x)
        return np.maximum(np.max(x @ self._scaled.T, axis=-1), 0.0)

    def normal(self, x):
        x = self._check_dim(x)
        scores = x @ self._scaled.T
        order = np.argsort(scores, axis=-1)
        top = np.take_along_axis(scores, order[..., -1:], axis=-1)[..., 0]
        second = np.take_along_axis(scores, order[..., -2:-1], axis=-1)[..., 0]
        if np.any(top - second <= TIE_TOL * np.maximum(np.abs(top), 1e-300)):
            raise AmbiguousNormal("point lies on an edge or vertex of the polytope")
        return self.normals[order[..., -1]]

    def ray_level_interval(self, p, d, c):
        p = self._check_dim(p)
        d = self._check_dim(d)
        p, d = np.broadcast_arrays(p, d)
        alpha = d @ self._scaled.T
        beta = p @ self._scaled.T
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = (c - beta) / alpha
        upper = np.where(alpha > 0, bound, np.inf).min(axis=-1)
        lower = np.where(alpha < 0, bound, -np.inf).max(axis=-1)
        empty = np.any((alpha == 0) & (beta > c), axis=-1) | (lower > upper)
        upper = np.where(empty, -np.inf, upper)
        lower = np.where(empty, np.inf, lower)
        return lower, upper

    @property
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            self._vertices = _enumerate_vertices(self.normals, self.offsets)
        return self._vertices

    def kink_directions(self):
        v = self.vertices
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def to_json(self):
        return {"type": "hpolytope", "normals": self.normals.tolist(),
                "offsets": self.offsets.tolist()}

    def __repr__(self):
        return f"HPolytope(n={self.n}, facets={len(self.offsets)})"


def _enumerate_vertices(u, h):
    n = u.shape[1]
    found = []
    for idx in itertools.combinations(range(len(h)), n):
        sub = u[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, h[list(idx)])
        if np.all(u @ x <= h + HULL_TOL * np.maximum(1.0, np.abs(h))):
            if not any(np.linalg.norm(x - y) <= 1e-9 * max(1.0, np.linalg.norm(y))
                       for y in found):
                found.append(x)
    return np.array(found)


def _hyperplane(points):
    """Unit normal and offset of the hyperplane through ``n`` points in R^n."""
    diffs = points[1:] - points[0]
    _, sv, vt = np.linalg.svd(diffs)
    if len(sv) < points.shape[1] - 1 or sv[-1] < 1e-12 * max(1.0, sv[0]):
        return None
    u = vt[-1]
    return u, float(u @ points[0])


def vpoly_to_hpoly(vertices) -> HPolytope:
    """H-representation of ``conv(vertices)`` for dimension 2 or 3."""
    pts = np.array(vertices, dtype=float, ndmin=2)
    n = pts.shape[1]
    if n not in (2, 3):
        raise DimensionMismatch("vertex-to-facet conversion supports n = 2 or 3 only")
    if pts.shape[0] < n + 1 or np.linalg.matrix_rank(pts - pts.mean(axis=0), tol=1e-10) < n:
        raise DegenerateHull("vertices do not affinely span the space")
    scale = np.max(np.abs(pts))
    normals, offsets = [], []
    for idx in itertools.combinations(range(len(pts)), n):
        plane = _hyperplane(pts[list(idx)])
        if plane is None:
            continue
        u, h = plane
        side = pts @ u - h
        tol = HULL_TOL * scale
        if np.all(side <= tol):
            pass
        elif np.all(side >= -tol):
            u, h = -u, -h
        else:
            continue
        if any(np.allclose(u, u2, atol=1e-9) and abs(h - h2) <= 1e-9 * scale
               for u2, h2 in zip(normals, offsets)):
            continue
        if h <= 1e-12 * scale:
            raise OriginNotInterior("origin is not strictly inside the hull")
        normals.append(u)
        offsets.append(h)
    return HPolytope(np.array(normals), np.array(offsets))


class VPolytope(ConvexBody):
    """Convex hull of a vertex list (n <= 3); the gauge uses the H-form."""

    def __init__(self, vertices):
        pts = np.array(vertices, dtype=float, ndmin=2)
        self.n = pts.shape[1]
        self.hpoly = vpoly_to_hpoly(pts)
        self.points = pts
        # keep only extreme points: those lying on facets spanning R^n
        u, h = self.hpoly.normals, self.hpoly.offsets
        active = np.abs(pts @ u.T - h) <= HULL_TOL * np.maximum(1.0, h)
        extreme = [i for i in range(len(pts))
                   if np.linalg.matrix_rank(u[active[i]], tol=1e-9) == self.n]
        ext = pts[extreme]
        keep = []
        for x in ext:
            if not any(np.linalg.norm(x - y) <= 1e-12 for y in keep):
                keep.append(x)
        self.vertices = np.array(keep)

    def gauge(self, x):
        return self.hpoly.gauge(x)

    def normal(self, x):
        return self.hpoly.normal(x)

    def ray_level_interval(self, p, d, c):
        return self.hpoly.ray_level_interval(p, d, c)

    def kink_directions(self):
        v = self.vertices
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def to_json(self):
        return {"type": "vpolytope", "vertices": self.vertices.tolist()}

    def __repr__(self):
        return f"VPolytope(n={self.n}, vertices={len(self.vertices)})"


class UnitBall(ConvexBody):
    smooth = True

    def __init__(self, n: int = 2):
        if n < 2:
            raise DimensionMismatch("dimension must be at least 2")
        self.n = int(n)

    def gauge(self, x):
        return np.linalg.norm(self._check_dim(x), axis=-1)

    def normal(self, x):
        x = self._check_dim(x)
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def ray_level_interval(self, p, d, c):
        p = self._check_dim(p)
        d = self._check_dim(d)
        p, d = np.broadcast_arrays(p, d)
        a = np.sum(d * d, axis=-1)
        b = np.sum(p * d, axis=-1)
        cc = np.sum(p * p, axis=-1) - c * c
        disc = b * b - a * cc
        root = np.sqrt(np.maximum(disc, 0.0))
        lo = (-b - root) / a
        hi = (-b + root) / a
        lo = np.where(disc < 0, np.inf, lo)
        hi = np.where(disc < 0, -np.inf, hi)
        return lo, hi

    def to_json(self):
        return {"type": "ball", "dim": self.n}

    def __repr__(self):
        return f"UnitBall(n={self.n})"


class PNormBall(ConvexBody):
    """``{x : |x|_p <= radius}`` for ``1 < p < inf``."""

    smooth = True

    def __init__(self, p: float, radius: float = 1.0, n: int = 2):
        if not (1.0 < p < np.inf):
            raise ValueError("p must lie in (1, inf)")
        if radius <= 0:
            raise ValueError("radius must be positive")
        if n < 2:
            raise DimensionMismatch("dimension must be at least 2")
        self.p = float(p)
        self.radius = float(radius)
        self.n = int(n)

    def gauge(self, x):
        x = self._check_dim(x)
        return np.sum(np.abs(x) ** self.p, axis=-1) ** (1.0 / self.p) / self.radius

    def normal(self, x):
        x = self._check_dim(x)
        g = np.sign(x) * np.abs(x) ** (self.p - 1.0)
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def ray_level_interval(self, p, d, c):
        p = self._check_dim(p)
        d = self._check_dim(d)
        return _convex_level_interval(self.gauge, p, d, c)

    def loewner_radius(self) -> float:
        """Radius of the smallest centered ball containing the body."""
        # the hyperoctahedral symmetry forces the enclosing ellipsoid to be a ball
        if self.p >= 2.0:
            return self.radius * self.n ** (0.5 - 1.0 / self.p)
        return self.radius

    def to_json(self):
        return {"type": "pnorm", "p": self.p, "radius": self.radius, "dim": self.n}

    def __repr__(self):
        return f"PNormBall(p={self.p}, radius={self.radius}, n={self.n})"


def _convex_level_interval(fn, p, d, c, iters=100):
    """Sublevel interval of a convex function along rays, by bisection."""
    p, d = np.broadcast_arrays(p, d)
    shape = p.shape[:-1]
    f = lambda s: fn(p + s[..., None] * d)
    # minimize along the ray by golden section on a bracket that grows
    # until the function rises at both ends
    span = np.ones(shape)
    for _ in range(60):
        grow = (f(span) <= f(np.zeros(shape))) | (f(-span) <= f(np.zeros(shape)))
        if not np.any(grow):
            break
        span = np.where(grow, 2 * span, span)
    a, b = -span, span
    gr = (np.sqrt(5.0) - 1) / 2
    for _ in range(iters):
        x1 = b - gr * (b - a)
        x2 = a + gr * (b - a)
        left = f(x1) < f(x2)
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
    smin = 0.5 * (a + b)
    fmin = f(smin)
    lo, hi = _empty_interval(shape)
    ok = fmin <= c
    # outward bisection on each side
    def side(sign):
        step = np.ones(shape)
        for _ in range(200):
            out = f(smin + sign * step) <= c
            if not np.any(out & ok):
                break
            step = np.where(out, 2 * step, step)
        lo_s, hi_s = np.zeros(shape), step
        for _ in range(iters):
            mid = 0.5 * (lo_s + hi_s)
            inside = f(smin + sign * mid) <= c
            lo_s = np.where(inside, mid, lo_s)
            hi_s = np.where(inside, hi_s, mid)
        return smin + sign * 0.5 * (lo_s + hi_s)
    if np.any(ok):
        hi = np.where(ok, side(1.0), hi)
        lo = np.where(ok, side(-1.0), lo)
    return lo, hi


class LinearImage(ConvexBody):
    """The body ``A K`` for an invertible matrix ``A``."""

    def __init__(self, base: ConvexBody, A):
        A = np.array(A, dtype=float)
        if A.shape != (base.n, base.n):
            raise DimensionMismatch("transform has the wrong shape")
        if not np.all(np.isfinite(A)) or np.linalg.cond(A) >= 1e12:
            raise SingularTransform("transform is singular or ill-conditioned")
        self.base = base
        self.A = A
        self.Ainv = np.linalg.inv(A)
        self.n = base.n
        self.smooth = base.smooth

    def gauge(self, x):
        return self.base.gauge(self._check_dim(x) @ self.Ainv.T)

    def normal(self, x):
        x = self._check_dim(x)
        g = self.base.normal(x @ self.Ainv.T) @ self.Ainv
        return g / np.linalg.norm(g, axis=-1, keepdims=True)

    def ray_level_interval(self, p, d, c):
        p = self._check_dim(p) @ self.Ainv.T
        d = self._check_dim(d) @ self.Ainv.T
        return self.base.ray_level_interval(p, d, c)

    def kink_directions(self):
        k = self.base.kink_directions() @ self.A.T
        if len(k) == 0:
            return k
        return k / np.linalg.norm(k, axis=1, keepdims=True)

    def to_json(self):
        return {"type": "linear_image", "A": self.A.tolist(), "base": self.base.to_json()}

    def __repr__(self):
        return f"LinearImage({self.base!r})"


def transform(body: ConvexBody, A, v=None) -> ConvexBody:
    """Return the body ``A K + v``."""
    A = np.array(A, dtype=float)
    n = body.n
    if A.shape != (n, n):
        raise DimensionMismatch("transform has the wrong shape")
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) >= 1e12:
        raise SingularTransform("transform is singular or ill-conditioned")
    v = np.zeros(n) if v is None else np.asarray(v, dtype=float).ravel()
    if isinstance(body, VPolytope):
        return VPolytope(body.vertices @ A.T + v)
    if isinstance(body, HPolytope):
        Ainv_t = np.linalg.inv(A).T
        u = body.normals @ Ainv_t.T
        norms = np.linalg.norm(u, axis=1)
        h = (body.offsets + u @ v) / norms
        if np.any(h <= 0):
            raise OriginNotInterior("translation moves the origin out of the interior")
        return HPolytope(u / norms[:, None], h)
    if np.any(v != 0):
        raise OriginNotInterior("translations are supported for polytopes only")
    if isinstance(body, LinearImage):
        return LinearImage(body.base, A @ body.A)
    return LinearImage(body, A)


def polytope_vertices(body: ConvexBody) -> np.ndarray:
    if isinstance(body, VPolytope):
        return body.vertices
    if isinstance(body, HPolytope):
        return body.vertices
    if isinstance(body, LinearImage) and isinstance(body.base, (VPolytope, HPolytope)):
        return polytope_vertices(body.base) @ body.A.T
    raise TypeError(f"{body!r} is not a polytope")


def is_polytope(body: ConvexBody) -> bool:
    if isinstance(body, LinearImage):
        return is_polytope(body.base)
    return isinstance(body, (VPolytope, HPolytope))


def body_from_json(desc: dict) -> ConvexBody:
    """Parse a JSON body descriptor (see README for the schema)."""
    if not isinstance(desc, dict) or "type" not in desc:
        raise ValueError("body descriptor must be an object with a 'type' field")
    kind = desc["type"]
    if kind == "hpolytope":
        return HPolytope.from_inequalities(desc["normals"], desc["offsets"])
    if kind == "vpolytope":
        return VPolytope(desc["vertices"])
    if kind == "pnorm":
        return PNormBall(float(desc["p"]), float(desc.get("radius", 1.0)),
                         int(desc.get("dim", 2)))
    if kind == "ball":
        return UnitBall(int(desc.get("dim", 2)))
    if kind == "linear_image":
        return LinearImage(body_from_json(desc["base"]), desc["A"])
    raise ValueError(f"unknown body type {kind!r}")
