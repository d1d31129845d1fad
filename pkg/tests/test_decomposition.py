import math

import numpy as np
import pytest

from localsgd.decomposition import (
    epsilon_on_ball,
    natural_decomposition,
    optimal_convex_decomposition,
    residual_grad,
    taylor_decomposition,
)
from localsgd.errors import ConfigurationError, DomainError, UnsupportedOperationError
from localsgd.objectives import Composite, LogCosh, LogLossL2, Piecewise, Quadratic, Separable


def test_taylor_of_quadratic_is_exact():
    q = Quadratic.from_spectrum(3, 1.0, 4.0, seed=0, x_star=np.array([1.0, 2.0, 3.0]))
    dec = taylor_decomposition(q)
    assert dec.epsilon == 0.0
    x = np.random.default_rng(0).normal(size=(5, 3))
    np.testing.assert_allclose(dec.q_value(x), q.value(x), rtol=1e-12)
    np.testing.assert_allclose(dec.r_grad(x), 0.0, atol=1e-12)


def test_taylor_logcosh():
    dec = taylor_decomposition(LogCosh())
    assert dec.q_matrix[0, 0] == 1.0
    # residual gradient at 0.5 is tanh(0.5) - 0.5
    assert dec.r_grad(np.array([0.5]))[0] == pytest.approx(math.tanh(0.5) - 0.5, abs=1e-15)
    assert dec.r_grad(np.array([0.5]))[0] == pytest.approx(-0.0378828427, abs=1e-9)
    assert dec.r_grad(np.array([0.0]))[0] == 0.0


def test_taylor_logloss_curvature():
    obj = LogLossL2()
    dec = taylor_decomposition(obj)
    h = 1e-5
    x = obj.x_star
    fd = (obj.grad(x + h)[0] - obj.grad(x - h)[0]) / (2 * h)
    assert dec.q_matrix[0, 0] == pytest.approx(fd, abs=1e-9)
    assert dec.q_matrix[0, 0] == pytest.approx(0.1653798817, abs=1e-9)


def test_taylor_rejects_kink():
    with pytest.raises(UnsupportedOperationError):
        taylor_decomposition(Piecewise())


def test_epsilon_on_ball_examples():
    assert epsilon_on_ball(Quadratic(np.diag([1.0, 5.0])), 2.0) == 0.0
    for b in (0.1, 0.3, 1.0):
        assert epsilon_on_ball(Piecewise(), b) == pytest.approx(0.4, abs=1e-12)
    assert epsilon_on_ball(LogCosh(), 0.6) == pytest.approx(math.tanh(0.6) ** 2 / 2, abs=1e-12)


def test_epsilon_on_ball_errors():
    with pytest.raises(DomainError):
        epsilon_on_ball(LogCosh(), 0.0)
    with pytest.raises(UnsupportedOperationError):
        epsilon_on_ball(Separable(LogCosh(), 2), 1.0)


def test_optimal_convex_examples():
    dec = optimal_convex_decomposition(Quadratic(3 * np.eye(2)), 1.0)
    assert dec.L_R == 0.0 and dec.epsilon == 0.0
    pw = optimal_convex_decomposition(Piecewise(), 0.7)
    assert pw.q_matrix[0, 0] == pytest.approx(0.4)
    assert pw.L_R == pytest.approx(1.6)
    assert pw.epsilon == pytest.approx(0.8)
    lc = optimal_convex_decomposition(LogCosh(), 0.6)
    assert lc.q_matrix[0, 0] == pytest.approx(1 / math.cosh(0.6) ** 2, abs=1e-12)
    assert lc.epsilon == pytest.approx(math.tanh(0.6) ** 2, abs=1e-12)
    assert lc.convex_residual


def test_convex_residual_is_convex_on_ball():
    dec = optimal_convex_decomposition(LogCosh(), 1.5)
    x = np.linspace(-1.5, 1.5, 301)[:, None]
    g = dec.r_grad(x)[:, 0]
    # non-decreasing gradient with slope at most L_R
    slopes = np.diff(g) / np.diff(x[:, 0])
    assert np.all(slopes >= -1e-12)
    assert np.all(slopes <= dec.L_R + 1e-9)


def test_natural_decomposition():
    quad = Quadratic.from_spectrum(3, 1.0, 2.0, seed=4, x_star=np.array([0.5, 0.0, -1.0]))
    comp = Composite(quad, Separable(LogCosh(), 3, np.array([2.0, 1.0, 0.5])))
    dec = natural_decomposition(comp)
    x = np.random.default_rng(1).normal(size=(6, 3))
    np.testing.assert_allclose(dec.q_value(x), quad.value(x), atol=1e-12)
    np.testing.assert_allclose(dec.r_grad(x), comp.residual.grad(x), atol=1e-12)
    assert dec.L_R == pytest.approx(2.0) and dec.mu_R == 0.0
    with pytest.raises(UnsupportedOperationError):
        natural_decomposition(quad)


def test_residual_grad_dimension_check():
    dec = taylor_decomposition(LogCosh())
    assert residual_grad(dec, LogCosh(), np.array([0.0]))[0] == 0.0
    with pytest.raises(ConfigurationError):
        residual_grad(dec, LogCosh(), np.zeros(2))


def test_epsilon_decays_towards_minimum():
    eps = [epsilon_on_ball(LogCosh(), b) for b in (0.6, 0.4, 0.1)]
    assert eps[0] > eps[1] > eps[2]
    assert eps[2] / eps[0] < 0.05
