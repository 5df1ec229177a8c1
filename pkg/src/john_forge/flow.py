"""The r-parametrized functionals ``L_r`` and ``I_r`` and their minimizers.

With the example pair ``f(t) = (t + 1)_+`` and the ramp ``g`` (1 below -1,
``(1 - t)/2`` on ``[-1, 1]``, 0 above 1), the rescaled profiles are
``h_r(s) = h((s - 1)/(1 - r))``, so that

    f_r(s) = (s - r)_+ / (1 - r),
    g_r(c) = clip((2 - r - c) / (2 (1 - r)), 0, 1).

``L_r(A, v) = 1/(1-r) int f_r(|Ax + v|) g_r(|x|_K) dx`` is evaluated in
polar coordinates around the origin of ``x``-space.  ``I_r(M, w)`` uses an
independent evaluation in ``y``-space, so that the identity
``I_r(M, w) = |det B| L_r(B, (1 - r) w)`` with ``B = I + (1 - r) M`` gives a
two-path consistency check.

Minimization of ``L_r`` over ``(SL ∩ sym_+) x R^n`` uses ``A = expm(S)``
with ``S`` traceless symmetric, so ``det A = 1`` holds to rounding.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, expm_frechet
from scipy.optimize import minimize

from .body import ConvexBody, UnitBall, is_polytope, polytope_vertices
from .errors import MaxIterations, SingularDeformation
from .objective import ObjectiveF, PaperConvF
from .quadrature import TWO_PI, PolarProblem, QuadConfig, integrate, integrate_fixed, sphere_rule
from .symspace import chart_dim, coords_to_pair, sym0_coords

# --- profiles ----------------------------------------------------------------


def f_profile(t):
    return np.maximum(np.asarray(t, dtype=float) + 1.0, 0.0)


def f_prime(t):
    """Derivative of ``f`` away from the kink (taken as 0 at ``t = -1``)."""
    return (np.asarray(t, dtype=float) > -1.0).astype(float)


def g_profile(t):
    return np.clip((1.0 - np.asarray(t, dtype=float)) / 2.0, 0.0, 1.0)


def rescale(h, r: float):
    """``h_r(s) = h((s - 1) / (1 - r))``."""
    return lambda s: h((np.asarray(s, dtype=float) - 1.0) / (1.0 - r))


def _check_r(r):
    r = float(r)
    if not 0.5 < r < 1.0:
        raise ValueError("r must lie in (1/2, 1)")
    return r


@dataclass(frozen=True)
class RScaledPair:
    """The example pair ``(f, g)`` rescaled at ``r``."""

    r: float

    def __post_init__(self):
        _check_r(self.r)

    def f_r(self, s):
        return np.maximum(np.asarray(s, dtype=float) - self.r, 0.0) / (1.0 - self.r)

    def fp_r(self, s):
        return (np.asarray(s, dtype=float) > self.r).astype(float)

    def g_r(self, c):
        return np.clip((2.0 - self.r - np.asarray(c, dtype=float)) / (2.0 * (1.0 - self.r)), 0.0, 1.0)

    @staticmethod
    def check_profiles(lo=-4.0, hi=4.0, num=8001) -> dict:
        t = np.linspace(lo, hi, num)
        f, g = f_profile(t), g_profile(t)
        inner = (t > -1) & (t < 1)
        return {
            "f_zero_left": bool(np.all(f[t <= -1] == 0)),
            "f_increasing_right": bool(np.all(np.diff(f[t >= -1]) > 0)),
            "g_one_left": bool(np.all(g[t <= -1] == 1)),
            "g_zero_right": bool(np.all(g[t >= 1] == 0)),
            "g_nonincreasing": bool(np.all(np.diff(g) <= 0)),
            "g_positive_inside": bool(np.all(g[inner] > 0)),
        }


# --- x-space: L_r and its derivatives ----------------------------------------


def _angles(dirs):
    dirs = np.asarray(dirs, dtype=float)
    if dirs.size == 0:
        return ()
    return tuple(np.mod(np.arctan2(dirs[:, 1], dirs[:, 0]), TWO_PI))


def _unit(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _xspace_problem(body: ConvexBody, r: float, A, v, kind: str) -> PolarProblem:
    """Polar problem in ``x``-space; ``kind`` is ``value``, ``full`` or ``stat``.

    ``full`` stacks ``[L, dL/dA (n*n), dL/dv (n)]``; ``stat`` stacks the
    stationarity integrals ``[T (n*n), b (n)]``.
    """
    n = body.n
    A = np.asarray(A, dtype=float)
    v = np.asarray(v, dtype=float).ravel()
    k = 1.0 - r
    detA = float(np.linalg.det(A))

    def ray_data(xi):
        gxi = body.gauge(xi)
        Axi = xi @ A.T
        a = np.sum(Axi * Axi, axis=-1)
        b = Axi @ v
        c = v @ v - r * r
        disc = b * b - a * c
        root = np.sqrt(np.maximum(disc, 0.0))
        s1 = np.where(disc > 0, (-b - root) / a, 0.0)
        s2 = np.where(disc > 0, (-b + root) / a, 0.0)
        return gxi, Axi, s1, s2

    def breaks(xi):
        gxi, _, s1, s2 = ray_data(xi)
        s_out = (2.0 - r) / gxi
        br = np.stack([np.zeros_like(gxi), s1, s2, r / gxi, s_out], axis=-1)
        return np.sort(np.clip(br, 0.0, s_out[:, None]), axis=-1)

    def psi(theta):
        xi = _unit(theta)
        y_out = ((2.0 - r) / body.gauge(xi))[:, None] * (xi @ A.T) + v
        return np.maximum(np.linalg.norm(v), np.linalg.norm(y_out, axis=-1)) - r

    def crossing(theta):
        # |y| = r exactly where the g-kink at gauge = r sits
        xi = _unit(theta)
        y_mid = (r / body.gauge(xi))[:, None] * (xi @ A.T) + v
        return np.linalg.norm(y_mid, axis=-1) - r

    def integrand(s, xi):
        gxi = body.gauge(xi)
        x = s[..., None] * xi[:, None, :]
        y = x @ A.T + v
        ny = np.linalg.norm(y, axis=-1)
        gr = np.clip((2.0 - r - s * gxi[:, None]) / (2.0 * k), 0.0, 1.0)
        jac = s ** (n - 1)
        if kind == "value":
            return np.maximum(ny - r, 0.0) / k * gr * jac / k
        live = ny > r
        safe = np.where(live, ny, 1.0)
        u = y / safe[..., None]
        if kind == "full":
            val = np.maximum(ny - r, 0.0) / k * gr * jac / k
            wgt = np.where(live, gr * jac, 0.0) / (k * k)
            gA = (wgt[..., None, None] * u[..., :, None] * x[..., None, :]).reshape(*s.shape, n * n)
            gv = wgt[..., None] * u
            return np.concatenate([val[..., None], gA, gv], axis=-1)
        if kind == "stat":
            wgt = np.where(live, gr * jac, 0.0) * detA / k
            T = (wgt[..., None, None] * u[..., :, None] * y[..., None, :]).reshape(*s.shape, n * n)
            b = wgt[..., None] * u
            return np.concatenate([T, b], axis=-1)
        raise ValueError(kind)

    kinks = _angles(body.kink_directions()) if n == 2 else ()
    events = (crossing,) if n == 2 else ()
    return PolarProblem(n, breaks, integrand, psi, kinks, events)


def _check_body(body: ConvexBody):
    if body.n not in (2, 3):
        raise ValueError("flow quadrature supports n = 2 or 3")


def Lr_eval(body: ConvexBody, r: float, A, v, quad: QuadConfig | None = None,
            return_error: bool = False):
    """``L_r(A, v)`` by adaptive polar quadrature.

    Parameters
    ----------
    body : ConvexBody
        Body in Löwner position, ``n`` in {2, 3}.
    r : float
        Scale parameter in ``(1/2, 1)``.
    A : array_like
        Invertible matrix (positive-definite in the intended use).
    v : array_like
        Translation.
    return_error : bool
        Also return the estimated absolute error.
    """
    _check_body(body)
    r = _check_r(r)
    val, err, _ = integrate(_xspace_problem(body, r, A, v, "value"), quad)
    return (float(val), err) if return_error else float(val)


def Lr_value_grad(body: ConvexBody, r: float, A, v, quad: QuadConfig, adaptive: bool = False):
    """Value and Euclidean gradient ``(dL/dA, dL/dv)`` over all matrices."""
    _check_body(body)
    r = _check_r(r)
    n = body.n
    prob = _xspace_problem(body, r, A, v, "full")
    out = integrate(prob, quad)[0] if adaptive else integrate_fixed(prob, quad)
    return float(out[0]), out[1:1 + n * n].reshape(n, n), out[1 + n * n:]


def stationarity_residual(body: ConvexBody, r: float, A, v, quad: QuadConfig | None = None):
    """Residuals of the first-order conditions at ``(A, v)``.

    Returns ``(iso_residual, center_residual, lam)`` where ``T`` and ``b``
    are the matrix and vector integrals, ``lam = tr(T)/n``,
    ``iso_residual = |T - lam I|_F / lam`` and ``center_residual = |b| / lam``.
    """
    _check_body(body)
    r = _check_r(r)
    n = body.n
    out, _, _ = integrate(_xspace_problem(body, r, A, v, "stat"), quad)
    T = out[:n * n].reshape(n, n)
    b = out[n * n:]
    lam = float(np.trace(T) / n)
    iso = float(np.linalg.norm(T - lam * np.eye(n)) / lam)
    center = float(np.linalg.norm(b) / lam)
    return iso, center, lam


# --- y-space: I_r and the weak-convergence integrals ---------------------------


def _deformation(r, M, w, n):
    M = np.asarray(M, dtype=float)
    w = np.asarray(w, dtype=float).ravel()
    B = np.eye(n) + (1.0 - r) * M
    if not np.all(np.isfinite(B)):
        raise SingularDeformation("I + (1 - r) M is not finite")
    sv = np.linalg.svd(B, compute_uv=False)
    # relative to the identity part, so a tiny multiple of I also counts
    if sv[-1] <= 1e-12 * max(1.0, sv[0]):
        raise SingularDeformation("I + (1 - r) M is singular")
    return B, np.linalg.inv(B), (1.0 - r) * w


def _yspace_problem(body: ConvexBody, r: float, M, w, weight) -> PolarProblem:
    """Rays ``y = s xi`` with ``z(s) = B^{-1}(s xi - u)``.

    ``weight(s, y)`` multiplies ``g_r(|z|_K) s^{n-1} / (1 - r)`` and must
    vanish for ``s <= r``.
    """
    n = body.n
    B, Binv, u = _deformation(r, M, w, n)
    p = -Binv @ u
    k = 1.0 - r
    verts = polytope_vertices(body) if (n == 2 and is_polytope(body)) else None

    def levels(xi):
        d = xi @ Binv.T
        lo1, hi1 = body.ray_level_interval(p, d, r)
        lo2, hi2 = body.ray_level_interval(p, d, 2.0 - r)
        return d, lo1, hi1, lo2, hi2

    def breaks(xi):
        d, lo1, hi1, lo2, hi2 = levels(xi)
        top = np.maximum(np.where(np.isfinite(hi2), hi2, r), r)
        cols = [np.full_like(top, r), lo1, hi1, lo2, top]
        if verts is not None:
            # the gauge along the line is piecewise linear, kinked where the
            # line crosses a vertex ray
            num = p[0] * verts[:, 1] - p[1] * verts[:, 0]
            den = d[:, :1] * verts[None, :, 1] - d[:, 1:] * verts[None, :, 0]
            with np.errstate(divide="ignore", invalid="ignore"):
                sk = -num[None, :] / den
            cols.extend(sk.T)
        br = np.stack(cols, axis=-1)
        br = np.where(np.isfinite(br), br, r)
        return np.sort(np.clip(br, r, top[:, None]), axis=-1)

    def psi(theta):
        hi2 = levels(_unit(theta))[4]
        return np.where(np.isfinite(hi2), hi2, -np.inf) - r

    def ev(idx):
        def fn(theta):
            val = levels(_unit(theta))[idx]
            return np.where(np.isfinite(val), val - r, -1.0)
        return fn

    def integrand(s, xi):
        y = s[..., None] * xi[:, None, :]
        z = (y - u) @ Binv.T
        gr = np.clip((2.0 - r - body.gauge(z)) / (2.0 * k), 0.0, 1.0)
        wt = weight(s, y)
        base = gr * s ** (n - 1) / k
        return (wt * base[..., None]) if wt.ndim == s.ndim + 1 else wt * base

    kinks = ()
    if verts is not None:
        dirs = np.vstack([c * verts @ B.T + u for c in (r, 2.0 - r)])
        kinks = _angles(dirs)
    events = (ev(1), ev(2), ev(3)) if n == 2 else ()
    return PolarProblem(n, breaks, integrand, psi, kinks, events)


def Ir_eval(body: ConvexBody, r: float, M, w, quad: QuadConfig | None = None,
            return_error: bool = False):
    """``I_r(M, w) = 1/(1-r) int f_r(|x|) g_r(|(I + (1-r)M)^{-1}(x - (1-r)w)|_K) dx``."""
    _check_body(body)
    r = _check_r(r)
    k = 1.0 - r

    def weight(s, y):
        return np.maximum(s - r, 0.0) / k

    val, err, _ = integrate(_yspace_problem(body, r, M, w, weight), quad)
    return (float(val), err) if return_error else float(val)


# --- the limit functional on the sphere --------------------------------------


def sphere_nodes(n: int, N: int = 4096):
    """Nodes and weights on ``S^{n-1}``: trapezoid for ``n = 2``, product Gauss for ``n = 3``."""
    if n == 2:
        th = np.arange(N) * (TWO_PI / N)
        return _unit(th), np.full(N, TWO_PI / N)
    if n == 3:
        return sphere_rule(max(1, N // 256), 16)
    raise ValueError("sphere rules are provided for n = 2 or 3")


def I1_sphere(F: ObjectiveF | None, M, w, n: int = 2, N: int = 4096) -> float:
    """``I_1(M, w) = int_S F(<xi, M xi + w>) dxi`` for the unit ball.

    The default ``N = 4096`` keeps the trapezoid error near ``1e-10`` for the
    twice-differentiable ``PaperConv`` profile.
    """
    F = F or PaperConvF()
    xi, wt = sphere_nodes(n, N)
    t = np.einsum("ki,ij,kj->k", xi, np.asarray(M, dtype=float), xi) + xi @ np.asarray(w, dtype=float)
    return float(wt @ F.value(t))


def minimize_I1(F: ObjectiveF | None = None, n: int = 2, N: int = 4096):
    """Minimize ``I_1`` over ``sym_0 x R^n`` (unit ball); returns ``(M0, w0)``."""
    F = F or PaperConvF()
    xi, wt = sphere_nodes(n, N)
    V = np.hstack([sym0_coords(np.einsum("ki,kj->kij", xi, xi)), xi])

    def fun(x):
        t = V @ x
        return float(wt @ F.value(t)), V.T @ (wt * F.d1(t))

    res = minimize(fun, np.zeros(chart_dim(n)), jac=True, method="BFGS",
                   options={"gtol": 1e-12})
    pair = coords_to_pair(res.x, n)
    return pair.M, pair.w


# --- minimization of L_r -----------------------------------------------------


@dataclass
class FlowConfig:
    quad: QuadConfig = field(default_factory=QuadConfig)
    gtol: float = 1e-7
    max_iter: int = 200
    start_A: np.ndarray | None = None
    start_v: np.ndarray | None = None

    def __post_init__(self):
        if self.gtol <= 0 or self.max_iter < 1:
            raise ValueError("gtol must be positive and max_iter at least 1")


@dataclass
class FlowResult:
    r: float
    A: np.ndarray
    v: np.ndarray
    value: float
    value_error: float
    iso_residual: float
    center_residual: float
    lam: float
    iterations: int = 0
    converged: bool = True

    @property
    def M(self) -> np.ndarray:
        return (self.A - np.eye(len(self.v))) / (1.0 - self.r)

    @property
    def w(self) -> np.ndarray:
        return self.v / (1.0 - self.r)

    @property
    def distance(self) -> float:
        """``|A - I|_F + |v|``."""
        return float(np.linalg.norm(self.A - np.eye(len(self.v))) + np.linalg.norm(self.v))

    def to_json(self) -> dict:
        return {"r": self.r, "A": self.A.tolist(), "v": self.v.tolist(),
                "M": self.M.tolist(), "w": self.w.tolist(), "value": self.value,
                "iso_residual": self.iso_residual,
                "center_residual": self.center_residual, "lambda": self.lam}


def _spd_log(A):
    lam, U = np.linalg.eigh(0.5 * (A + A.T))
    if lam[0] <= 0:
        raise ValueError("start matrix must be positive-definite")
    S = (U * np.log(lam)) @ U.T
    return S - np.trace(S) / len(S) * np.eye(len(S))


def minimize_Lr(body: ConvexBody, r: float, cfg: FlowConfig | None = None) -> FlowResult:
    """Minimize ``L_r`` over ``(SL ∩ sym_+) x R^n`` by BFGS in ``(S, v)``, ``A = expm(S)``.

    The quadrature level is fixed by an adaptive evaluation at the start
    point and then held constant so the optimizer sees a smooth objective.
    Convexity and uniqueness of the minimum make the local result global.
    """
    _check_body(body)
    r = _check_r(r)
    cfg = cfg or FlowConfig()
    n = body.n
    S0 = np.zeros((n, n)) if cfg.start_A is None else _spd_log(np.asarray(cfg.start_A, dtype=float))
    v0 = np.zeros(n) if cfg.start_v is None else np.asarray(cfg.start_v, dtype=float)
    x0 = np.concatenate([sym0_coords(S0), v0])
    _, _, level = integrate(_xspace_problem(body, r, expm(S0), v0, "value"), cfg.quad)
    gscale = 1.0 / (1.0 - r)

    def unpack(x):
        pair = coords_to_pair(x, n)
        return pair.M, pair.w

    def fun(x):
        S, v = unpack(x)
        A = expm(S)
        val, gA, gv = Lr_value_grad(body, r, A, v, level)
        gS = expm_frechet(S, 0.5 * (gA + gA.T), compute_expm=False)
        return val, np.concatenate([sym0_coords(0.5 * (gS + gS.T)), gv])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(fun, x0, jac=True, method="BFGS",
                       options={"gtol": cfg.gtol * gscale, "maxiter": cfg.max_iter})
    if res.nit >= cfg.max_iter and not res.success:
        raise MaxIterations(f"flow minimization did not converge in {cfg.max_iter} iterations")
    S, v = unpack(res.x)
    A = expm(S)
    A = 0.5 * (A + A.T)
    value, err = Lr_eval(body, r, A, v, cfg.quad, return_error=True)
    iso, center, lam = stationarity_residual(body, r, A, v, cfg.quad)
    gnorm = float(np.linalg.norm(res.jac))
    converged = bool(res.success or gnorm <= 100 * cfg.gtol * gscale)
    return FlowResult(r, A, np.asarray(v, dtype=float), value, err, iso, center, lam,
                      int(res.nit), converged)


# --- derivative and weak-convergence reports ---------------------------------


def derivative_check(body: ConvexBody, rs, M0=None, w0=None, results=None,
                     cfg: FlowConfig | None = None) -> list[dict]:
    """Finite-difference slopes ``((A_r, v_r) - (I, 0)) / (r - 1)`` against ``-(M0, w0)``.

    ``M0, w0`` default to zero (the unit-ball minimizer of ``I_1``).  Pass
    ``results`` to reuse already computed minimizers.
    """
    n = body.n
    M0 = np.zeros((n, n)) if M0 is None else np.asarray(M0, dtype=float)
    w0 = np.zeros(n) if w0 is None else np.asarray(w0, dtype=float)
    if results is None:
        results = [minimize_Lr(body, r, cfg) for r in rs]
    report = []
    for res in results:
        slope_M = (res.A - np.eye(n)) / (res.r - 1.0)
        slope_w = res.v / (res.r - 1.0)
        dev = float(np.sqrt(np.sum((slope_M + M0) ** 2) + np.sum((slope_w + w0) ** 2)))
        report.append({"r": res.r, "slope_M": slope_M.tolist(), "slope_w": slope_w.tolist(),
                       "deviation": dev})
    return report


def total_mass(y):
    return np.ones(y.shape[:-1])


def odd_x1(y):
    return y[..., 0] * np.exp(-np.sum(y * y, axis=-1))


def inner_bump(y):
    """Smooth bump supported in ``|y| < 1/2``, away from the sphere."""
    q = 1.0 - 4.0 * np.sum(y * y, axis=-1)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(q > 0, np.exp(-1.0 / np.where(q > 0, q, 1.0)), 0.0)


TEST_FUNCTIONS = {"total_mass": total_mass, "odd_x1": odd_x1, "inner_bump": inner_bump}


def weak_integral(body: ConvexBody, r: float, delta, M0=None, w0=None,
                  quad: QuadConfig | None = None):
    """``1/(1-r) int delta(x) (f')_r(|x|)/|x| g_r(|B^{-1}(x - v)|_K) dx`` with the
    linear part ``B = I + (1-r) M0``, ``v = (1-r) w0``."""
    _check_body(body)
    r = _check_r(r)
    n = body.n
    M0 = np.zeros((n, n)) if M0 is None else M0
    w0 = np.zeros(n) if w0 is None else w0

    def weight(s, y):
        return np.where(s > r, delta(y) / s, 0.0)

    return integrate(_yspace_problem(body, r, M0, w0, weight), quad)[:2]


def weak_convergence_check(body: ConvexBody | None = None, test_fns=None, rs=(0.9, 0.95, 0.99),
                           M0=None, w0=None, F: ObjectiveF | None = None,
                           quad: QuadConfig | None = None) -> list[dict]:
    """Compare the rescaled integrals with ``int_S delta(xi) F'(<xi, M0 xi + w0>) dxi``."""
    body = body or UnitBall(2)
    F = F or PaperConvF()
    n = body.n
    M0 = np.zeros((n, n)) if M0 is None else np.asarray(M0, dtype=float)
    w0 = np.zeros(n) if w0 is None else np.asarray(w0, dtype=float)
    test_fns = test_fns or TEST_FUNCTIONS
    xi, wt = sphere_nodes(n)
    dens = F.d1(np.einsum("ki,ij,kj->k", xi, M0, xi) + xi @ w0)
    report = []
    for name, delta in test_fns.items():
        limit = float(wt @ (delta(xi) * dens))
        for r in rs:
            val, err = weak_integral(body, r, delta, M0, w0, quad)
            report.append({"test_fn": name, "r": float(r), "value": float(val),
                           "limit": limit, "deviation": abs(float(val) - limit),
                           "quad_error": float(err)})
    return report
