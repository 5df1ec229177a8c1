"""Unconstrained minimization of ``I_c`` over ``sym_0 x R^n`` in chart coordinates."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .objective import DiscreteMeasureProblem, solvability_check
from .symspace import SymPair, coords_to_pair, pair_to_coords

CONVERGED = "Converged"
NOT_COERCIVE = "NotCoercive"
MAX_ITER = "MaxIter"
EPS = np.finfo(float).eps


@dataclass
class MinimizeConfig:
    grad_tol: float = 1e-10
    max_iter: int = 500
    c1: float = 1e-4
    backtrack: float = 0.5
    start: SymPair | None = None
    eig_floor: float = 1e-8
    escape_norm: float = 1e6
    max_extrapolate: int = 60

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class MinimizeResult:
    minimizer: SymPair
    value: float
    grad_norm: float
    iterations: int
    status: str
    coords: np.ndarray
    history: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    def to_json(self) -> dict:
        return {"status": self.status, "iterations": self.iterations,
                "value": self.value, "grad_norm": self.grad_norm,
                "M": self.minimizer.M.tolist(), "w": self.minimizer.w.tolist()}


def _direction(H, g, floor):
    lam, U = np.linalg.eigh(H)
    gt = U.T @ g
    newton = lam >= floor
    step = np.where(newton, -gt / np.where(newton, lam, 1.0), -gt)
    return U @ step


def minimize_Ic(prob: DiscreteMeasureProblem, cfg: MinimizeConfig | None = None) -> MinimizeResult:
    """Damped Newton with Armijo backtracking and step extrapolation.

    Hessian eigendirections below ``cfg.eig_floor`` get a gradient step
    instead of a Newton step.  If a full step is accepted the step length is
    doubled for as long as the objective keeps decreasing (unless the Newton
    decrement is negligible), so an iterate
    escaping along a ray with no minimum reaches ``cfg.escape_norm`` in a
    bounded number of iterations.
    """
    cfg = cfg or MinimizeConfig()
    n = prob.n
    x = np.zeros(prob.dim) if cfg.start is None else pair_to_coords(cfg.start, tol=1e-10)
    f = prob.value(x)
    g = prob.grad(x)
    history = [f]
    traces = [coords_to_pair(x, n).trace()]
    status = MAX_ITER
    it = 0
    for it in range(cfg.max_iter + 1):
        gn = float(np.linalg.norm(g))
        if gn <= cfg.grad_tol:
            # all weights vanishing means every contact has <xi, M xi + w> < 0:
            # the iterate itself is a direction along which I_c never increases
            status = NOT_COERCIVE if not np.any(prob.F.d1(prob.args(x)) > 0) else CONVERGED
            break
        if np.linalg.norm(x) > cfg.escape_norm:
            status = NOT_COERCIVE
            break
        if it == cfg.max_iter:
            break
        d = _direction(prob.hess(x), g, cfg.eig_floor)
        slope = float(g @ d)
        alpha = 1.0
        accepted = False
        while alpha > 1e-20:
            f_new = prob.value(x + alpha * d)
            if f_new - f <= cfg.c1 * alpha * slope:
                accepted = True
                break
            alpha *= cfg.backtrack
        if not accepted:
            # the predicted decrease is below rounding; take the full step
            # when the objective moves only within rounding and the gradient drops
            f_new = prob.value(x + d)
            if f_new - f <= 16 * EPS * (1.0 + abs(f)) and np.linalg.norm(prob.grad(x + d)) < gn:
                alpha, accepted = 1.0, True
        if not accepted:
            break
        # near a minimum the decrement -slope is at rounding level and
        # doubling would only chase noise
        if alpha == 1.0 and -slope > 1e-10 * (1.0 + abs(f)):
            for _ in range(cfg.max_extrapolate):
                f_try = prob.value(x + 2 * alpha * d)
                if not f_try < f_new:
                    break
                alpha *= 2
                f_new = f_try
        x = x + alpha * d
        f = f_new
        g = prob.grad(x)
        history.append(f)
        traces.append(coords_to_pair(x, n).trace())
    pair = coords_to_pair(x, n)
    return MinimizeResult(pair, f, float(np.linalg.norm(g)), it, status, x, history, traces)


def certify_uniqueness(prob: DiscreteMeasureProblem, result: MinimizeResult,
                       eig_tol: float = 1e-9) -> bool:
    """True iff the Hessian at the minimizer is positive-definite and the
    contact configuration is interior; otherwise warn that the minimizers
    may form a face."""
    if not result.converged:
        raise ValueError("result did not converge")
    lam_min = float(np.linalg.eigvalsh(prob.hess(result.coords))[0])
    ok = lam_min > eig_tol and solvability_check(prob.points).interior
    if not ok:
        warnings.warn("minimizer may not be unique: Hessian is singular or the "
                      "contact configuration is not interior", RuntimeWarning, stacklevel=2)
    return ok
