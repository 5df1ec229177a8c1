import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import (conv_oracle, cross_polytope, hemisphere_config, interior_config,
                     lp_max_min_weight, random_sym, random_unit, regular_polygon, regular_simplex)
from john_forge.objective import (F_VARIANTS, DiscreteMeasureProblem, ExpF, F_eval, F_prime,
                                  PaperConvF, ScaledF, ShiftedSquareF, I_c, design_matrix, get_F,
                                  grad_I_c, hessian_I_c, solvability_check)
from john_forge.symspace import SymPair, chart_dim, coords_to_pair, pair_to_coords

ALL_F = [ExpF(), PaperConvF(), ShiftedSquareF()]


@pytest.mark.parametrize("F", ALL_F, ids=lambda F: F.name)
def test_profile_hypotheses(F):
    assert all(F.check_hypotheses().values())


@pytest.mark.parametrize("F", ALL_F, ids=lambda F: F.name)
def test_profile_derivatives(F):
    x = np.linspace(-3, 3, 301) + 1e-3
    h = 1e-6
    assert np.allclose((F.value(x + h) - F.value(x - h)) / (2 * h), F.d1(x), atol=1e-6)
    assert np.allclose((F.d1(x + h) - F.d1(x - h)) / (2 * h), F.d2(x), atol=1e-5)


def test_named_values():
    assert F_eval(ExpF(), 0.0) == 1.0 and F_prime(ExpF(), 0.0) == 1.0
    assert F_eval(PaperConvF(), -2.0) == 0.0
    assert F_eval(PaperConvF(), 0.0) == pytest.approx(2 / 3)
    assert F_prime(PaperConvF(), 0.0) == pytest.approx(1.0)
    assert get_F("PaperConv").name == "paperconv"
    assert set(F_VARIANTS) == {"exp", "paperconv", "shiftedsquare"}
    with pytest.raises(ValueError):
        get_F("cubic")


@pytest.mark.parametrize("x", [-1.0, 0.0, 1.0, -1.7, 2.5])
def test_paperconv_matches_convolution(x):
    assert PaperConvF()(x) == pytest.approx(conv_oracle(x), abs=1e-8)


def test_paperconv_vanishes_left():
    x = np.linspace(-10, -2, 500)
    assert np.all(PaperConvF()(x) == 0.0)


def test_problem_validation():
    with pytest.raises(ValueError):
        DiscreteMeasureProblem([[1.0, 1.0]])
    prob = DiscreteMeasureProblem(cross_polytope(2))
    assert prob.dim == chart_dim(2)


def test_I_c_values():
    prob = DiscreteMeasureProblem(regular_polygon(7))
    assert I_c(prob, SymPair.zero(2)) == pytest.approx(7.0)
    tri = regular_simplex(2)
    w = np.array([0.3, -0.7])
    prob = DiscreteMeasureProblem(tri)
    assert I_c(prob, SymPair(np.zeros((2, 2)), w)) == pytest.approx(np.sum(np.exp(tri @ w)))
    with pytest.raises(ValueError):
        I_c(prob, SymPair(np.eye(2), w))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 4), fi=st.integers(0, 2))
def test_midpoint_convexity(seed, n, fi):
    rng = np.random.default_rng(seed)
    prob = DiscreteMeasureProblem(random_unit(rng, 8, n), ALL_F[fi])
    a, b = rng.normal(size=(2, prob.dim))
    assert prob.value(0.5 * (a + b)) <= 0.5 * (prob.value(a) + prob.value(b)) + 1e-12 * (
        1 + abs(prob.value(a)) + abs(prob.value(b)))


@pytest.mark.parametrize("F", ALL_F, ids=lambda F: F.name)
@pytest.mark.parametrize("n", [2, 3, 4])
def test_gradient_and_hessian_finite_differences(F, n):
    rng = np.random.default_rng(n)
    prob = DiscreteMeasureProblem(random_unit(rng, 12, n), F)
    h = 1e-6
    for _ in range(5):
        x = 0.5 * rng.normal(size=prob.dim)
        g = prob.grad(x)
        E = np.eye(prob.dim)
        fd = np.array([(prob.value(x + h * e) - prob.value(x - h * e)) / (2 * h) for e in E])
        assert np.linalg.norm(fd - g) <= 1e-6 * np.linalg.norm(g)
        H = hessian_I_c(prob, x)
        fdH = np.array([(prob.grad(x + h * e) - prob.grad(x - h * e)) / (2 * h) for e in E])
        assert np.linalg.norm(fdH - H) <= 1e-5 * np.linalg.norm(H)
        assert np.linalg.eigvalsh(H)[0] >= -1e-10


def test_pair_gradient_consistent_with_chart():
    rng = np.random.default_rng(3)
    prob = DiscreteMeasureProblem(random_unit(rng, 9, 3))
    x = rng.normal(size=prob.dim)
    p = coords_to_pair(x, 3)
    g = grad_I_c(prob, p, project=True)
    assert np.allclose(pair_to_coords(g, tol=1e-9), prob.grad(x), atol=1e-12)
    q = coords_to_pair(rng.normal(size=prob.dim), 3)
    t = 1e-6
    dd = (I_c(prob, p + t * q) - I_c(prob, p - t * q)) / (2 * t)
    assert dd == pytest.approx(g.inner(q), abs=1e-8 * max(1.0, abs(dd)))
    full = grad_I_c(prob, p)
    assert np.trace(full.M) == pytest.approx(np.sum(prob.F.d1(prob.args(x))))


def test_gradient_vanishes_on_cross_polytope():
    prob = DiscreteMeasureProblem(cross_polytope(2))
    assert np.linalg.norm(prob.grad(np.zeros(prob.dim))) < 1e-14


def test_exp_hessian_at_zero():
    pts = random_unit(np.random.default_rng(1), 6, 3)
    prob = DiscreteMeasureProblem(pts)
    V = design_matrix(pts)
    assert np.allclose(hessian_I_c(prob, np.zeros(prob.dim)), V.T @ V)


def test_orthogonal_covariance():
    rng = np.random.default_rng(6)
    pts = random_unit(rng, 10, 3)
    O, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    p = coords_to_pair(rng.normal(size=8), 3)
    a = I_c(DiscreteMeasureProblem(pts), p)
    b = I_c(DiscreteMeasureProblem(pts @ O.T), SymPair(O @ p.M @ O.T, O @ p.w))
    assert a == pytest.approx(b, rel=1e-12)


def test_scaled_profile():
    F = ScaledF(PaperConvF(), 2.0)
    x = np.linspace(-3, 3, 11)
    assert np.allclose(F(x), 2 * PaperConvF()(x))
    assert np.allclose(F.d2(x), 2 * PaperConvF().d2(x))


# solvability ---------------------------------------------------------------

def test_cross_polytope_is_boundary_with_equal_weights():
    # the points +-e_i give rank-deficient (xi xi^T, xi): off-diagonal
    # directions of sym_0 are never seen, so the point is on the boundary
    res = solvability_check(cross_polytope(2))
    assert res.status == "Boundary"
    assert res.t_star == pytest.approx(0.25)
    assert np.allclose(res.weights, 0.25)
    assert res.rank == 3
    null = res.null_direction
    assert np.allclose(design_matrix(cross_polytope(2)) @ pair_to_coords(null, 1e-9), 0, atol=1e-12)


def test_hemisphere_example_is_outside_with_witness():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    res = solvability_check(pts)
    assert res.status == "Outside"
    W = res.witness
    vals = np.einsum("mi,ij,mj->m", pts, W.M, pts) + pts @ W.w
    assert np.all(vals <= 1e-12)
    # the hand witness from the problem statement also works
    assert np.all(pts @ np.array([0.0, -1.0]) <= 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_regular_simplex_is_boundary(n):
    # n + 1 points cannot span a space of dimension n(n+3)/2 - 1 > n + 1
    res = solvability_check(regular_simplex(n))
    assert res.status == "Boundary"
    assert res.t_star == pytest.approx(1 / (n + 1))


def test_pentagon_is_interior():
    res = solvability_check(regular_polygon(5))
    assert res.status == "Interior"
    assert res.t_star == pytest.approx(0.2)
    assert res.to_json()["status"] == "Interior"


@pytest.mark.parametrize("seed", range(6))
def test_random_fixtures_match_lp_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 2
    pts = interior_config(rng, n)
    res = solvability_check(pts)
    assert res.status == "Interior"
    assert res.t_star == pytest.approx(lp_max_min_weight(pts), abs=1e-9)
    bad = solvability_check(hemisphere_config(rng, n))
    assert bad.status == "Outside"
    assert bad.witness is not None
