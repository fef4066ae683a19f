"""Optimizer behavior tests on standard analytic functions."""

import math

import numpy as np
import pytest
import scipy.optimize

from qforecast.optimize import (OptimOptions, finite_diff_gradient,
                                minimize_derivative_free, minimize_quasi_newton)


def quad1(x):
    return float((x[0] - 3.0) ** 2)


def ellipse(x):
    return float(x[0] ** 2 + 10.0 * x[1] ** 2)


def ellipse_grad(x):
    return np.array([2.0 * x[0], 20.0 * x[1]])


def rosenbrock(x):
    return float((1 - x[0]) ** 2 + 100.0 * (x[1] - x[0] ** 2) ** 2)


def rosenbrock_grad(x):
    return np.array([
        -2.0 * (1 - x[0]) - 400.0 * x[0] * (x[1] - x[0] ** 2),
        200.0 * (x[1] - x[0] ** 2),
    ])


def random_quadratic(rng, n):
    """f(x) = (x-c)^T M (x-c) with eigenvalues in [1, 10]."""
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    eig = rng.uniform(1.0, 10.0, size=n)
    m = q @ np.diag(eig) @ q.T
    c = rng.normal(size=n)
    fun = lambda x: float((x - c) @ m @ (x - c))
    grad = lambda x: 2.0 * m @ (x - c)
    return fun, grad, c


class TestDerivativeFree:
    def test_one_dim_quadratic(self):
        res = minimize_derivative_free(quad1, [0.0])
        assert res.converged
        assert abs(res.x[0] - 3.0) <= 1e-4

    def test_ellipse_from_far_start(self):
        res = minimize_derivative_free(ellipse, [5.0, 5.0])
        assert res.converged
        assert np.linalg.norm(res.x) <= 1e-3

    def test_ten_dim_quadratic_gradient_norm(self):
        rng = np.random.default_rng(0)
        fun, grad, _ = random_quadratic(rng, 10)
        res = minimize_derivative_free(fun, rng.normal(size=10),
                                       OptimOptions(max_iters=2000, max_evals=2000))
        assert np.linalg.norm(grad(res.x)) <= 1e-4
        assert res.evaluations <= 2000

    def test_best_seen_monotonicity(self):
        res = minimize_derivative_free(ellipse, [4.0, -2.0])
        assert res.fun <= min(res.trace)
        assert res.fun == pytest.approx(ellipse(res.x))

    def test_deterministic(self):
        r1 = minimize_derivative_free(ellipse, [4.0, -2.0])
        r2 = minimize_derivative_free(ellipse, [4.0, -2.0])
        assert r1.trace == r2.trace
        assert np.array_equal(r1.x, r2.x)

    def test_eval_budget_respected(self):
        res = minimize_derivative_free(ellipse, [5.0, 5.0],
                                       OptimOptions(max_evals=20))
        assert res.evaluations == 20
        assert not res.converged

    def test_non_finite_start_rejected(self):
        with pytest.raises(ValueError):
            minimize_derivative_free(lambda x: math.nan, [1.0])

    def test_flat_function_terminates(self):
        res = minimize_derivative_free(lambda x: 1.0, [0.0, 0.0],
                                       OptimOptions(max_iters=500))
        assert res.fun == 1.0


class TestQuasiNewton:
    def test_ellipse(self):
        res = minimize_quasi_newton(ellipse, [5.0, 5.0], ellipse_grad)
        assert res.converged
        assert np.linalg.norm(res.x) <= 1e-3

    def test_rosenbrock_standard_start(self):
        res = minimize_quasi_newton(rosenbrock, [-1.2, 1.0], rosenbrock_grad,
                                    OptimOptions(max_iters=500))
        assert res.fun <= 1e-6

    def test_matches_scipy_on_rosenbrock(self):
        ours = minimize_quasi_newton(rosenbrock, [-1.2, 1.0], rosenbrock_grad,
                                     OptimOptions(max_iters=500))
        ref = scipy.optimize.minimize(rosenbrock, [-1.2, 1.0],
                                      jac=rosenbrock_grad, method="L-BFGS-B")
        assert ours.fun <= ref.fun + 1e-6
        assert np.allclose(ours.x, ref.x, atol=1e-3)

    def test_ten_dim_quadratic_gradient_norm(self):
        rng = np.random.default_rng(1)
        fun, grad, _ = random_quadratic(rng, 10)
        res = minimize_quasi_newton(fun, rng.normal(size=10), grad,
                                    OptimOptions(max_iters=2000, max_evals=2000))
        assert np.linalg.norm(grad(res.x)) <= 1e-4
        assert res.evaluations <= 2000

    def test_bounds_keep_iterates_feasible_and_kkt_holds(self):
        lo = np.array([1.0, 1.0])
        hi = np.array([2.0, 2.0])
        seen = []
        fun = lambda x: (seen.append(x.copy()), ellipse(x))[1]
        res = minimize_quasi_newton(fun, [1.5, 1.5], ellipse_grad,
                                    OptimOptions(bounds=(lo, hi)))
        for x in seen:
            assert np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12)
        # unconstrained optimum (0,0) sits outside: expect the lower corner,
        # with the gradient pointing into the infeasible region
        assert np.allclose(res.x, [1.0, 1.0], atol=1e-6)
        assert np.all(ellipse_grad(res.x) > 0)

    def test_best_seen_monotonicity(self):
        res = minimize_quasi_newton(rosenbrock, [-1.2, 1.0], rosenbrock_grad,
                                    OptimOptions(max_iters=200))
        assert res.fun <= min(res.trace)

    def test_deterministic(self):
        r1 = minimize_quasi_newton(ellipse, [3.0, 4.0], ellipse_grad)
        r2 = minimize_quasi_newton(ellipse, [3.0, 4.0], ellipse_grad)
        assert r1.trace == r2.trace
        assert np.array_equal(r1.x, r2.x)

    def test_eval_budget(self):
        res = minimize_quasi_newton(rosenbrock, [-1.2, 1.0], rosenbrock_grad,
                                    OptimOptions(max_evals=5))
        assert res.evaluations <= 5
        assert not res.converged

    def test_works_with_finite_diff_gradient(self):
        grad = lambda x: finite_diff_gradient(ellipse, x)
        res = minimize_quasi_newton(ellipse, [2.0, -1.0], grad)
        assert np.linalg.norm(res.x) <= 1e-3


class TestFiniteDiff:
    def test_quadratic_gradient(self):
        x = np.array([1.0, -2.0])
        got = finite_diff_gradient(ellipse, x)
        assert np.allclose(got, ellipse_grad(x), atol=1e-6)

    def test_rosenbrock_gradient(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            x = rng.uniform(-2, 2, size=2)
            got = finite_diff_gradient(rosenbrock, x)
            assert np.allclose(got, rosenbrock_grad(x), rtol=1e-5, atol=1e-4)
