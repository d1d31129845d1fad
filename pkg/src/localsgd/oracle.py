"""Stochastic gradient oracle attaining the strong growth bound with equality.

A sampled gradient is ``g + sigma * u + sqrt(rho) * s * g`` where ``g`` is the
exact gradient, ``u`` a random vector with E u = 0 and E|u|^2 = 1, and ``s`` an
independent random sign. Hence the noise has mean zero and second moment
exactly ``sigma^2 + rho |g|^2``.

Random numbers come from numpy's Philox bit generator. Every (seed, replicate,
worker) triple owns two streams, one for ``u`` and one for ``s``, each keyed by
``SeedSequence([seed, replicate, worker, k])``. Sample ``n`` of a worker is
the ``n``-th draw of its streams, so results do not depend on the order in
which workers are advanced.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .objectives import Objective

CONSTRUCTIONS = ("gaussian", "rademacher")


@dataclass(frozen=True)
class NoiseModel:
    sigma: float = 0.0
    rho: float = 0.0
    # distribution of the additive direction u
    construction: str = "gaussian"

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigurationError("sigma must be >= 0", "sigma")
        if self.rho < 0:
            raise ConfigurationError("rho must be >= 0", "rho")
        if self.construction not in CONSTRUCTIONS:
            raise ConfigurationError(
                f"construction must be one of {CONSTRUCTIONS}", "construction"
            )

    @property
    def deterministic(self) -> bool:
        return self.sigma == 0 and self.rho == 0


def _generator(seed: int, replicate: int, worker: int, sub: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), int(replicate), int(worker), sub])
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class RngStream:
    """Random stream of one worker in one replicate; ``counter`` counts samples."""

    seed: int
    worker_id: int = 0
    replicate: int = 0
    counter: int = field(default=0, init=False)
    _dir: np.random.Generator = field(init=False, repr=False)
    _sign: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.worker_id < 0 or self.replicate < 0:
            raise ConfigurationError("worker_id and replicate must be >= 0", "worker_id")
        self._dir = _generator(self.seed, self.replicate, self.worker_id, 0)
        self._sign = _generator(self.seed, self.replicate, self.worker_id, 1)

    def draw(self, n: int, d: int, construction: str = "gaussian"):
        """Next ``n`` samples: directions of shape (n, d) and signs of shape (n,)."""
        if construction == "gaussian":
            u = self._dir.standard_normal((n, d))
        else:
            u = np.where(self._dir.random((n, d)) < 0.5, -1.0, 1.0)
        u /= np.sqrt(d)
        s = np.where(self._sign.random(n) < 0.5, -1.0, 1.0)
        self.counter += n
        return u, s


def perturb(model: NoiseModel, g: np.ndarray, u: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Apply the noise construction to exact gradients ``g`` (s broadcasts over d)."""
    out = g + model.sigma * u
    if model.rho:
        out = out + np.sqrt(model.rho) * s[..., None] * g
    return out


def sample_gradient(model: NoiseModel, obj: Objective, x, rng: RngStream) -> np.ndarray:
    g = obj.grad(x)
    if model.deterministic:
        return g
    u, s = rng.draw(1, obj.dim, model.construction)
    return perturb(model, g, u[0], s[0])


def noise_second_moment(model: NoiseModel, grad_norm_sq: float) -> float:
    if grad_norm_sq < 0:
        raise ConfigurationError("grad_norm_sq must be >= 0", "grad_norm_sq")
    return model.sigma**2 + model.rho * grad_norm_sq
