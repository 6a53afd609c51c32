import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mocont.errors import InconsistentData, ShapeMismatch, UnknownProblem
from mocont.linalg import fd_gradient_check, fd_hessian_check
from mocont.problems import (LabeledData, LeastSquares, Polynomial, Quadratic, TrajectoryData, build_mlp,
                             build_sindy, central_differences, load_iris, lorenz_rhs, make_iris_mlp,
                             make_paper_problem, monomial_exponents, random_lasso_instance, simulate_lorenz,
                             train_test_split)


def test_unknown_problem():
    with pytest.raises(UnknownProblem):
        make_paper_problem("rosenbrock")


def test_example_gradients_at_paper_points():
    # gradients quoted for the two activation examples at (1, 0, 0)
    np.testing.assert_allclose(make_paper_problem("example2").gradient([1.0, 0, 0]), [-2, -2, -2])
    np.testing.assert_allclose(make_paper_problem("example3").gradient([1.0, 0, 0]), [-2, -2, 2])


def test_toy_gradient_at_origin():
    # third entry: 4 (0 - 1)^3 - 3/2 (0 - 1/4)^2 = -4 - 3/32
    g = make_paper_problem("toy4_1").gradient(np.zeros(3))
    np.testing.assert_allclose(g, [-0.5, -1.0, -4.0 - 3.0 / 32.0])


def test_polynomial_is_seeded():
    a = Polynomial(50, seed=3)
    b = make_paper_problem("polynomial", n=50, seed=3)
    np.testing.assert_array_equal(a.a, b.a)
    assert a.a[0] == 1.0
    assert np.all(np.abs(a.a) <= 1.0)
    assert not np.array_equal(a.a, Polynomial(50, seed=4).a)
    assert a.value(a.a) == 0.0


@given(st.integers(0, 1000))
def test_polynomial_derivatives(seed):
    m = Polynomial(6, seed=seed)
    x = np.random.default_rng(seed).uniform(-2, 2, 6)
    assert fd_gradient_check(m, x) < 1e-6
    assert fd_hessian_check(m, x) < 1e-6
    np.testing.assert_allclose(m.gradient_batch(x[None])[0], m.gradient(x))


def test_vectorized_batch_matches_pointwise(rng):
    for name in ("example1", "example2", "example3", "toy4_1", "split"):
        m = make_paper_problem(name)
        X = rng.uniform(-1, 1, (7, m.dim))
        np.testing.assert_allclose(m.gradient_batch(X), [m.gradient(x) for x in X])
        np.testing.assert_allclose(m.value_batch(X), [m.value(x) for x in X])


def test_hessian_modes(rng):
    m = make_paper_problem("split")
    x = rng.uniform(-1, 1, 3)
    fd = m.with_hessian_mode("finite_difference")
    assert m.hessian_mode == "analytic"
    np.testing.assert_allclose(fd.hessian(x), m.hessian(x), atol=1e-6)
    with pytest.raises(ValueError):
        m.with_hessian_mode("bfgs")


def test_quadratic_and_least_squares(rng):
    q = Quadratic([1.0, -2.0], Q=[[2.0, 0.5], [0.5, 1.0]])
    assert q.value([1.0, -2.0]) == 0.0
    assert fd_gradient_check(q, rng.standard_normal(2)) < 1e-6
    A, b = rng.standard_normal((6, 3)), rng.standard_normal(6)
    ls = LeastSquares(A, b, scale=0.5)
    x = rng.standard_normal(3)
    assert ls.value(x) == pytest.approx(0.5 * np.sum((A @ x - b) ** 2))
    assert fd_gradient_check(ls, x) < 1e-6
    with pytest.raises(ValueError):
        LeastSquares(A, b[:-1])


def test_random_lasso_instance_shape():
    m = random_lasso_instance(2, m=20, n=8)
    assert m.A.shape == (20, 8) and m.dim == 8
    np.testing.assert_array_equal(m.A, random_lasso_instance(2, m=20, n=8).A)


# -- SINDy -------------------------------------------------------------------
def test_lorenz_rhs_fixed_point():
    beta, rho = 8.0 / 3.0, 28.0
    c = np.sqrt(beta * (rho - 1))
    np.testing.assert_allclose(lorenz_rhs([c, c, rho - 1]), 0.0, atol=1e-12)


def test_simulate_lorenz_matches_rhs():
    traj = simulate_lorenz(steps=400)
    assert traj.states.shape == (400, 3)
    np.testing.assert_array_equal(traj.states[0], [-8.0, 8.0, 27.0])
    # interior differences of a noiseless RK4 trajectory track the vector field
    exact = np.array([lorenz_rhs(x) for x in traj.states[1:-1]])
    err = np.abs(traj.derivatives[1:-1] - exact).max() / np.abs(exact).max()
    assert err < 1e-2


def test_noise_is_seeded():
    a = simulate_lorenz(steps=50, noise=1e-3, seed=1)
    b = simulate_lorenz(steps=50, noise=1e-3, seed=1)
    np.testing.assert_array_equal(a.states, b.states)
    assert not np.array_equal(a.states, simulate_lorenz(steps=50, noise=1e-3, seed=2).states)


def test_monomials_graded_lex():
    e = monomial_exponents(3, 2)
    assert e[0] == (0, 0, 0)
    assert e[1:4] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    assert len(monomial_exponents(3, 3)) == 20


def test_sindy_objective(tmp_path):
    traj = simulate_lorenz(steps=300, noise=1e-3, seed=0)
    m = build_sindy(traj, poly_order=2, normalize=True)
    assert m.dim == 10 * 3
    x = np.random.default_rng(0).standard_normal(m.dim)
    assert m.value(x) == pytest.approx(m.residual_value(x), rel=1e-10)
    assert fd_gradient_check(m, x) < 1e-6
    A, b = m.as_least_squares()
    assert np.sum((A @ x - b) ** 2) == pytest.approx(m.value(x), rel=1e-10)
    assert m.labels()[:2] == ["1", "x1"]
    traj.to_csv(tmp_path / "traj.csv")
    back = TrajectoryData.from_csv(tmp_path / "traj.csv")
    np.testing.assert_array_equal(back.states, traj.states)


def test_sindy_recovers_lorenz_without_noise():
    m = build_sindy(simulate_lorenz(steps=2000), poly_order=2)
    A, b = m.as_least_squares()
    W = np.linalg.lstsq(A, b, rcond=None)[0].reshape(m.c, m.m)
    # x1' = 10 (x2 - x1); second-order differences at dt = 0.01 cost about 1%
    assert W[1, 0] == pytest.approx(-10.0, rel=0.03)
    assert W[2, 0] == pytest.approx(10.0, rel=0.03)


def test_sindy_input_validation():
    t = np.arange(5.0)
    with pytest.raises(InconsistentData):
        central_differences([0.0, 1.0, 3.0], np.zeros((3, 2)))
    with pytest.raises(InconsistentData):
        build_sindy(TrajectoryData(t, np.zeros((5, 2)), np.zeros((4, 2))))


# -- MLP ---------------------------------------------------------------------
def test_iris_bundle():
    data = load_iris()
    assert data.features.shape == (150, 4)
    assert np.bincount(data.labels).tolist() == [50, 50, 50]


def test_split_is_seeded_partition():
    data = load_iris()
    tr, te = train_test_split(data, 0.7, seed=4)
    assert tr.labels.size == 105 and te.labels.size == 45
    tr2, _ = train_test_split(data, 0.7, seed=4)
    np.testing.assert_array_equal(tr.features, tr2.features)


@pytest.mark.parametrize("activation", ["tanh", "softplus"])
def test_mlp_gradient(activation):
    m = make_iris_mlp(seed=0, activation=activation)
    assert m.dim == 25
    rng = np.random.default_rng(1)
    for _ in range(3):
        assert fd_gradient_check(m, rng.standard_normal(25)) < 1e-4


def test_mlp_zero_weights_give_uniform_prediction():
    m = make_iris_mlp()
    P = m.predict_proba(np.zeros(25))
    np.testing.assert_allclose(P, 1.0 / 3.0)
    assert m.value(np.zeros(25)) == pytest.approx(np.log(3.0))


def test_mlp_shape_errors():
    data = LabeledData(np.zeros((4, 3)), np.array([0, 1, 0, 1]))
    with pytest.raises(ShapeMismatch):
        build_mlp([4, 2], data)
    m = build_mlp([3, 2], data)
    with pytest.raises(ShapeMismatch):
        m.value(np.zeros(5))
