import numpy as np
import pytest
from scipy.optimize import linprog

from helpers import cross_polytope, hemisphere_config, interior_config, lp_max_min_weight, random_unit
from john_forge.lp import linprog_eq, max_min_weight, separating_direction
from john_forge.objective import design_matrix


def test_small_lp_against_scipy():
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = rng.normal(size=(3, 6))
        x0 = rng.uniform(0.1, 1.0, size=6)
        b = A @ x0
        c = rng.uniform(0.0, 1.0, size=6)
        ours = linprog_eq(c, A, b)
        ref = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * 6, method="highs")
        assert ours.status == "optimal"
        assert ours.fun == pytest.approx(ref.fun, abs=1e-9)
        assert np.allclose(A @ ours.x, b, atol=1e-9)
        assert np.all(ours.x >= -1e-12)


def test_infeasible_and_unbounded():
    assert linprog_eq([1.0, 1.0], [[1.0, 1.0]], [-1.0]).status == "infeasible"
    assert linprog_eq([-1.0, 0.0], [[1.0, -1.0]], [0.0]).status == "unbounded"


def test_redundant_rows_are_handled():
    A = np.array([[1.0, 1.0, 0.0], [2.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    res = linprog_eq([1.0, 2.0, 3.0], A, [1.0, 2.0, 1.0])
    assert res.status == "optimal"
    assert res.fun == pytest.approx(
        linprog([1.0, 2.0, 3.0], A_eq=A, b_eq=[1.0, 2.0, 1.0], method="highs").fun)


@pytest.mark.parametrize("seed", range(8))
def test_max_min_weight_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    pts = random_unit(rng, 10, 2 + seed % 2)
    t, lam = max_min_weight(design_matrix(pts))
    ref = lp_max_min_weight(pts)
    if ref is None:
        assert t is None
    else:
        assert t == pytest.approx(ref, abs=1e-9)
        assert np.allclose(lam @ design_matrix(pts), 0.0, atol=1e-9)
        assert lam.sum() == pytest.approx(1.0)


def test_cross_polytope_weights():
    t, lam = max_min_weight(design_matrix(cross_polytope(2)))
    assert t == pytest.approx(0.25)
    assert np.allclose(lam, 0.25)


def test_separating_direction_certifies_hemisphere():
    rng = np.random.default_rng(2)
    for _ in range(5):
        a = design_matrix(hemisphere_config(rng, 3))
        y = separating_direction(a)
        assert y is not None
        assert np.all(a @ y <= -1 + 1e-9)
    assert separating_direction(design_matrix(interior_config(rng, 2))) is None
