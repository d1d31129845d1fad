import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import optimize, special

from localsgd.errors import ConfigurationError, NoMinimizerError, UnsupportedOperationError
from localsgd.objectives import (
    Composite,
    LogCosh,
    LogLossL2,
    Piecewise,
    Quadratic,
    Separable,
    grad,
    make_objective,
    max_abs_third_derivative,
    minimizer,
    second_derivative_range,
    value,
)


def fd_grad(obj, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (obj.value(x + e) - obj.value(x - e)) / (2 * h)
    return out


def test_value_examples():
    assert value(Quadratic(np.eye(2)), np.zeros(2)) == 0.0
    assert value(LogCosh(), np.array([0.6])) == pytest.approx(math.log(math.cosh(0.6)), abs=1e-15)
    assert value(LogCosh(), np.array([0.6])) == pytest.approx(0.170, abs=5e-4)
    assert value(Piecewise(), np.array([-1.0])) == pytest.approx(0.2, abs=1e-15)


def test_grad_examples():
    assert grad(LogCosh(), np.array([0.0]))[0] == 0.0
    g = grad(LogCosh(), np.array([0.6]))[0]
    assert g == pytest.approx(math.tanh(0.6), abs=1e-15)
    assert g == pytest.approx(0.537050, abs=5e-7)
    assert g == pytest.approx(fd_grad(LogCosh(), [0.6])[0], abs=1e-8)
    assert grad(Piecewise(), np.array([-1.0]))[0] == pytest.approx(-0.4, abs=1e-15)


def test_logcosh_is_stable_for_large_inputs():
    x = np.array([800.0])
    assert np.isfinite(LogCosh().value(x))
    assert LogCosh().value(x) == pytest.approx(800 - math.log(2), rel=1e-15)


def test_second_derivative_range_examples():
    assert second_derivative_range(Quadratic(np.diag([1.0, 10.0])), np.ones(2), 3.0) == pytest.approx((1, 10))
    assert second_derivative_range(Piecewise(), np.array([0.0]), 0.3) == (0.4, 2.0)
    lo, hi = second_derivative_range(LogCosh(), np.array([0.0]), 0.6)
    assert lo == pytest.approx(1 / math.cosh(0.6) ** 2, abs=1e-15)
    assert lo == pytest.approx(0.71158, abs=1e-5)
    assert hi == 1.0


def test_second_derivative_range_rejects_general_objectives():
    sep = Separable(LogCosh(), 2)
    with pytest.raises(UnsupportedOperationError):
        second_derivative_range(sep, np.zeros(2), 1.0)


def test_minimizer_examples():
    assert minimizer(LogCosh())[0] == 0.0
    q = Quadratic(2 * np.eye(3), b=np.array([2.0, 2.0, 2.0]))
    np.testing.assert_allclose(minimizer(q), np.ones(3), atol=1e-14)
    # independent root of expit(x) - 1 + 0.06 x
    ref = optimize.brentq(lambda x: special.expit(x) - 1 + 0.06 * x, 0, 4, xtol=1e-15)
    assert minimizer(LogLossL2())[0] == pytest.approx(ref, abs=1e-12)
    assert minimizer(LogLossL2())[0] == pytest.approx(1.995174683, abs=1e-9)


def test_quadratic_spectrum_and_minimizer():
    q = Quadratic.from_spectrum(5, 1.0, 10.0, seed=3, x_star=np.arange(5.0))
    eig = np.linalg.eigvalsh(q.A)
    assert eig[0] == pytest.approx(1.0, abs=1e-12)
    assert eig[-1] == pytest.approx(10.0, abs=1e-12)
    assert (q.mu, q.L) == (1.0, 10.0)
    assert np.linalg.norm(q.grad(q.x_star)) <= 1e-10
    np.testing.assert_allclose(q.x_star, np.arange(5.0), atol=1e-12)


def test_quadratic_without_minimizer():
    q = Quadratic(np.diag([1.0, 0.0]), b=np.array([0.0, 1.0]))
    with pytest.raises(NoMinimizerError):
        q.x_star


def test_dimension_mismatch():
    with pytest.raises(ConfigurationError):
        Quadratic(np.eye(3)).value(np.zeros(2))


def test_batched_evaluation_matches_rowwise():
    q = Quadratic.from_spectrum(3, 0.5, 4.0, seed=1)
    X = np.random.default_rng(0).normal(size=(4, 2, 3))
    vals = q.value(X)
    grads = q.grad(X)
    assert vals.shape == (4, 2)
    assert grads.shape == (4, 2, 3)
    assert vals[1, 1] == pytest.approx(q.value(X[1, 1]), rel=1e-14)


def test_third_derivative_bound_logcosh():
    # max |2 tanh sech^2| = 4 / (3 sqrt 3), attained inside [-1, 1]
    assert max_abs_third_derivative(LogCosh(), np.array([0.0]), 1.0) == pytest.approx(
        4 / (3 * math.sqrt(3)), rel=1e-9
    )


def test_composite_minimizer_and_constants():
    quad = Quadratic.from_spectrum(3, 1.0, 2.0, seed=0, x_star=np.array([1.0, -1.0, 0.5]))
    comp = Composite(quad, Separable(LogCosh(), 3, np.array([1.0, 2.0, 0.5]), np.array([0.0, 1.0, -1.0])))
    assert np.linalg.norm(comp.grad(comp.x_star)) < 1e-10
    assert comp.mu == pytest.approx(1.0)
    assert comp.L == pytest.approx(2.0 + 2.0)


def test_make_objective():
    assert isinstance(make_objective("logcosh"), LogCosh)
    q = make_objective("quadratic", d=4, mu=1, L=3, seed=2)
    assert (q.dim, q.mu, q.L) == (4, 1.0, 3.0)
    with pytest.raises(ConfigurationError):
        make_objective("rosenbrock")
    with pytest.raises(ConfigurationError):
        make_objective("quadratic", d=3)


CATALOG = [
    LogCosh(),
    LogLossL2(),
    Piecewise(),
    Quadratic.from_spectrum(4, 0.5, 6.0, seed=7),
    Separable(LogLossL2(), 3, np.array([1.0, 0.5, 2.0]), np.array([0.0, 1.0, -2.0])),
]


@pytest.mark.parametrize("obj", CATALOG, ids=lambda o: o.kind)
def test_smoothness_sandwich(obj):
    rng = np.random.default_rng(11)
    x = obj.x_star + rng.uniform(-10, 10, (1000, obj.dim))
    y = obj.x_star + rng.uniform(-10, 10, (1000, obj.dim))
    gap = obj.value(y) - obj.value(x) - np.sum(obj.grad(x) * (y - x), axis=-1)
    sq = np.sum((y - x) ** 2, axis=-1)
    assert np.all(gap - obj.mu / 2 * sq >= -1e-9)
    assert np.all(obj.L / 2 * sq - gap >= -1e-9)


@pytest.mark.parametrize("obj", CATALOG, ids=lambda o: o.kind)
def test_gradient_matches_finite_differences(obj):
    x = obj.x_star + 0.3 + 0.1 * np.arange(obj.dim)
    np.testing.assert_allclose(obj.grad(x), fd_grad(obj, x), atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_logcosh_sandwich_property(x, y):
    obj = LogCosh()
    gap = obj.value(np.array([y])) - obj.value(np.array([x])) - obj.grad(np.array([x]))[0] * (y - x)
    assert -1e-9 <= gap <= 0.5 * (y - x) ** 2 + 1e-9
