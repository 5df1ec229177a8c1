import numpy as np
import pytest

from helpers import cross_polytope, interior_config, regular_polygon, regular_simplex
from john_forge.errors import AllZeroWeights, NonpositiveLambda
from john_forge.isotropic import (IsotropicMeasure, extract_weights, normalize_to_lambda,
                                  verify_john)
from john_forge.minimize import minimize_Ic
from john_forge.objective import DiscreteMeasureProblem, ExpF, PaperConvF, ShiftedSquareF
from john_forge.symspace import SymPair


def pipeline(points, F=None):
    prob = DiscreteMeasureProblem(points, F or ExpF())
    res = minimize_Ic(prob)
    return extract_weights(prob, res.minimizer)


def test_cross_polytope_weights():
    meas = pipeline(cross_polytope(2))
    assert np.allclose(meas.weights, 1.0)
    assert meas.lam == pytest.approx(2.0)
    assert meas.residual_iso == pytest.approx(0.0, abs=1e-14)


def test_triangle_weights():
    meas = pipeline(regular_simplex(2))
    assert np.allclose(meas.weights, 1.0)
    assert meas.lam == pytest.approx(1.5)
    assert meas.residual_iso <= 1e-12 and meas.residual_center <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_simplex_normalized_weights(n):
    pts = regular_simplex(n)
    # brute-force oracle: sum of xi xi^T equals (n+1)/n times the identity
    assert np.allclose(pts.T @ pts, (n + 1) / n * np.eye(n))
    meas = normalize_to_lambda(pipeline(pts))
    assert np.allclose(meas.weights, n / (n + 1), atol=1e-12)
    assert verify_john(meas).passed


def test_perturbed_weights_fail():
    pts = cross_polytope(2)
    c = np.ones(4)
    c[0] += 0.1
    meas = IsotropicMeasure.from_weights(pts, c)
    lam = c.sum() / 2
    S = np.einsum("m,mi,mj->ij", c, pts, pts)
    assert meas.residual_iso == pytest.approx(np.linalg.norm(S - lam * np.eye(2)))
    assert meas.residual_center == pytest.approx(0.1)
    report = verify_john(meas)
    assert not report.passed
    assert report.to_json()["pass"] is False


def test_identical_measures_identical_reports():
    meas = pipeline(regular_polygon(5))
    assert verify_john(meas).to_json() == verify_john(pipeline(regular_polygon(5))).to_json()


def test_normalization():
    meas = pipeline(cross_polytope(2))
    half = normalize_to_lambda(meas, 1.0)
    assert np.allclose(half.weights, meas.weights / 2)
    assert half.residual_iso / half.lam == pytest.approx(meas.residual_iso / meas.lam, abs=1e-14)
    n3 = normalize_to_lambda(pipeline(regular_simplex(3)))
    assert np.allclose(n3.weights, 0.75)
    with pytest.raises(NonpositiveLambda):
        normalize_to_lambda(IsotropicMeasure.from_weights(cross_polytope(2), np.zeros(4)))


def test_all_zero_weights():
    prob = DiscreteMeasureProblem(cross_polytope(2), PaperConvF())
    # <xi, M xi> = -3 puts every contact where F' vanishes
    with pytest.raises(AllZeroWeights):
        extract_weights(prob, SymPair(np.diag([-3.0, -3.0]), [0.0, 0.0]))


def test_weight_mismatch():
    with pytest.raises(ValueError):
        IsotropicMeasure.from_weights(cross_polytope(2), np.ones(3))


def test_report_clamps_tiny_weights():
    meas = IsotropicMeasure.from_weights(cross_polytope(2), [1.0, 1.0, 1.0, 1e-16])
    assert meas.to_json()["weights"][3] == 0.0
    assert meas.weights[3] == 1e-16


@pytest.mark.parametrize("seed", range(5))
def test_trace_identity_positivity_and_F_independence(seed):
    rng = np.random.default_rng(seed)
    pts = interior_config(rng, 2 + seed % 2)
    for F in (ExpF(), PaperConvF(), ShiftedSquareF()):
        meas = pipeline(pts, F)
        assert abs(meas.weights.sum() - meas.n * meas.lam) <= 1e-12 * max(1, meas.lam)
        assert np.all(meas.weights >= 0)
        assert meas.lam > 0
        assert verify_john(meas).passed


def test_orthogonal_equivariance():
    rng = np.random.default_rng(9)
    pts = interior_config(rng, 3)
    O, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    a = pipeline(pts).weights
    b = pipeline(pts @ O.T).weights
    assert np.allclose(np.sort(a), np.sort(b), atol=1e-7)
