import numpy as np
import pytest

from bempa.optimize import bfgs_minimize, wolfe_line_search


def rosen(x):
    return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2


def rosen_grad(x):
    return np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2), 200 * (x[1] - x[0] ** 2)])


def test_quadratic_1d():
    x, tr = bfgs_minimize(lambda x: (x[0] - 3) ** 2, lambda x: np.array([2 * (x[0] - 3)]), [0.0])
    assert abs(x[0] - 3) < 1e-8
    assert tr.converged


def test_quadratic_nd():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 5))
    q = a @ a.T + 5 * np.eye(5)
    b = rng.normal(size=5)
    x, tr = bfgs_minimize(lambda x: 0.5 * x @ q @ x - b @ x, lambda x: q @ x - b, np.zeros(5))
    assert np.allclose(x, np.linalg.solve(q, b), atol=1e-8)
    assert tr.converged


def test_rosenbrock():
    x, tr = bfgs_minimize(rosen, rosen_grad, [-1.2, 1.0])
    assert np.allclose(x, [1, 1], atol=1e-6)
    assert tr.converged
    assert all(b <= a for a, b in zip(tr.fvals, tr.fvals[1:]))


def test_flat_start_stops_immediately():
    x, tr = bfgs_minimize(lambda x: 0.0, lambda x: np.zeros(2), [1.0, 2.0])
    assert tr.nit == 0 and tr.status == "gtol" and tr.converged
    assert np.array_equal(x, [1.0, 2.0])


def test_maxiter_and_callback_stop():
    _, tr = bfgs_minimize(rosen, rosen_grad, [-1.2, 1.0], maxiter=3)
    assert tr.nit == 3 and tr.status == "maxiter" and not tr.converged
    _, tr = bfgs_minimize(rosen, rosen_grad, [-1.2, 1.0], callback=lambda k, x, f: k >= 2)
    assert tr.status == "callback" and tr.nit == 2


def test_wolfe_conditions_hold():
    f = lambda a: (a - 2) ** 2
    df = lambda a: 2 * (a - 2)
    alpha, *_ = wolfe_line_search(f, df, f(0), df(0))
    assert f(alpha) <= f(0) + 1e-4 * alpha * df(0)
    assert abs(df(alpha)) <= 0.9 * abs(df(0))


def test_empty_problem():
    x, tr = bfgs_minimize(lambda x: 1.5, lambda x: np.zeros(0), np.zeros(0))
    assert x.shape == (0,) and tr.fun == 1.5
