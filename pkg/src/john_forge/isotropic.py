"""Isotropic measures on contact points and their verification."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllZeroWeights, NonpositiveLambda
from .objective import DiscreteMeasureProblem
from .symspace import SymPair

REPORT_CLAMP = 1e-14


@dataclass(frozen=True)
class IsotropicMeasure:
    """Weights ``c_i >= 0`` on unit vectors ``xi_i`` with diagnostic residuals.

    ``lam`` is always ``sum(c) / n``, the value forced by taking traces in
    ``sum c_i xi_i xi_i^T = lam I``.
    """

    points: np.ndarray
    weights: np.ndarray
    lam: float
    residual_iso: float
    residual_center: float

    @classmethod
    def from_weights(cls, points, weights) -> "IsotropicMeasure":
        xi = np.array(points, dtype=float, ndmin=2)
        c = np.array(weights, dtype=float).ravel()
        if c.shape[0] != xi.shape[0]:
            raise ValueError("one weight per point required")
        n = xi.shape[1]
        lam = float(c.sum() / n)
        S = np.einsum("m,mi,mj->ij", c, xi, xi)
        iso = float(np.linalg.norm(S - lam * np.eye(n)))
        center = float(np.linalg.norm(c @ xi))
        return cls(xi, c, lam, iso, center)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    def to_json(self) -> dict:
        shown = np.where(np.abs(self.weights) < REPORT_CLAMP, 0.0, self.weights)
        return {"lambda": self.lam, "weights": shown.tolist(),
                "points": self.points.tolist(), "residual_iso": self.residual_iso,
                "residual_center": self.residual_center}


def extract_weights(prob: DiscreteMeasureProblem, minimizer: SymPair) -> IsotropicMeasure:
    """Weights ``c_i = F'(<xi_i, M0 xi_i + w0>)`` at a minimizer."""
    xi = prob.points
    t = np.einsum("mi,ij,mj->m", xi, minimizer.M, xi) + xi @ minimizer.w
    c = np.asarray(prob.F.d1(t), dtype=float)
    if not np.any(c > 0):
        raise AllZeroWeights("F' vanishes at every contact point")
    return IsotropicMeasure.from_weights(xi, c)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    lam: float
    total: float
    residual_iso: float
    residual_center: float
    min_weight: float
    tol: float

    def to_json(self) -> dict:
        return {"pass": self.passed, "lambda": self.lam, "total_weight": self.total,
                "residual_iso": self.residual_iso,
                "residual_center": self.residual_center,
                "min_weight": self.min_weight, "tol": self.tol}


def verify_john(meas: IsotropicMeasure, tol: float = 1e-8) -> VerificationReport:
    """Check ``sum c xi xi^T = lam I`` and ``sum c xi = 0`` relative to the scale."""
    min_w = float(meas.weights.min())
    passed = (meas.lam > 0
              and meas.residual_iso <= tol * meas.lam
              and meas.residual_center <= tol * meas.total
              and min_w >= -REPORT_CLAMP)
    return VerificationReport(bool(passed), meas.lam, meas.total, meas.residual_iso,
                              meas.residual_center, min_w, tol)


def normalize_to_lambda(meas: IsotropicMeasure, target: float = 1.0) -> IsotropicMeasure:
    if meas.lam <= 0:
        raise NonpositiveLambda("cannot normalize a measure with non-positive lambda")
    k = target / meas.lam
    return IsotropicMeasure(meas.points, meas.weights * k, meas.lam * k,
                            meas.residual_iso * k, meas.residual_center * k)
