import math

import numpy as np
import pytest

from localsgd.errors import ConfigurationError
from localsgd.objectives import Quadratic
from localsgd.oracle import NoiseModel, RngStream, noise_second_moment, perturb, sample_gradient


def noise_draws(model, g, n, seed=0):
    u, s = RngStream(seed, 0).draw(n, g.size, model.construction)
    return perturb(model, np.broadcast_to(g, (n, g.size)), u, s) - g


def test_noiseless_returns_exact_gradient():
    q = Quadratic(np.diag([1.0, 2.0]))
    x = np.array([1.0, -3.0])
    np.testing.assert_array_equal(sample_gradient(NoiseModel(), q, x, RngStream(0)), q.grad(x))


@pytest.mark.parametrize("construction", ["gaussian", "rademacher"])
def test_additive_second_moment(construction):
    noise = noise_draws(NoiseModel(1.0, 0.0, construction), np.array([1.0, 0.0, 2.0]), 100_000)
    sq = np.sum(noise**2, axis=1)
    assert abs(sq.mean() - 1.0) < 0.02


def test_strong_growth_second_moment():
    g = np.array([2.0, 0.0])  # |g|^2 = 4
    noise = noise_draws(NoiseModel(1.0, 1.0), g, 100_000, seed=5)
    sq = np.sum(noise**2, axis=1)
    assert abs(sq.mean() - 5.0) < 0.10


def test_rademacher_directions_have_unit_norm():
    u, _ = RngStream(1, 2).draw(50, 4, "rademacher")
    np.testing.assert_allclose(np.sum(u**2, axis=1), 1.0)


def test_noise_second_moment_formula():
    assert noise_second_moment(NoiseModel(0, 0), 3.0) == 0
    assert noise_second_moment(NoiseModel(2, 0), 10.0) == 4
    assert noise_second_moment(NoiseModel(1, 3), 2.0) == 7


def test_invalid_noise_models():
    with pytest.raises(ConfigurationError):
        NoiseModel(-1.0)
    with pytest.raises(ConfigurationError):
        NoiseModel(1.0, -0.5)
    with pytest.raises(ConfigurationError):
        NoiseModel(1.0, construction="cauchy")


def test_stream_is_reproducible_and_chunk_invariant():
    a = RngStream(7, worker_id=2, replicate=3)
    u1, s1 = a.draw(10, 3)
    b = RngStream(7, worker_id=2, replicate=3)
    parts = [b.draw(4, 3), b.draw(6, 3)]
    np.testing.assert_array_equal(u1, np.concatenate([p[0] for p in parts]))
    np.testing.assert_array_equal(s1, np.concatenate([p[1] for p in parts]))
    assert a.counter == b.counter == 10


def test_streams_differ_across_workers_and_replicates():
    u0, _ = RngStream(0, 0, 0).draw(5, 2)
    u1, _ = RngStream(0, 1, 0).draw(5, 2)
    u2, _ = RngStream(0, 0, 1).draw(5, 2)
    assert not np.array_equal(u0, u1)
    assert not np.array_equal(u0, u2)


def test_unbiased_per_coordinate():
    g = np.array([1.0, -1.0, 0.5])
    noise = noise_draws(NoiseModel(2.0, 3.0), g, 100_000, seed=9)
    se = noise.std(axis=0, ddof=1) / math.sqrt(noise.shape[0])
    assert np.all(np.abs(noise.mean(axis=0)) <= 4 * se)
