"""Local SGD over M simulated workers with a shared objective.

The simulation is vectorized over replicates: worker states live in an array
of shape (replicates, M, d). Noise for replicate r and worker m always comes
from ``RngStream(seed, m, r)``, so a replicate's trajectory does not depend on
how many other replicates run alongside it or on thread scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .decomposition import Decomposition
from .errors import ConfigurationError
from .objectives import Objective
from .oracle import NoiseModel, RngStream, perturb
from .schedules import Schedule, Thm1Schedule, Thm3Schedule

# cap on noise values drawn per chunk (replicates * iterations * M * d)
_CHUNK_BUDGET = 2_000_000


@dataclass
class RunConfig:
    objective: Objective
    schedule: Schedule
    noise: NoiseModel
    M: int
    H: int
    K: int
    x0: np.ndarray
    seed: int = 0
    replicates: int = 1
    decomposition: Decomposition | None = None
    parallel: bool = False

    def __post_init__(self):
        for name in ("M", "H", "K", "replicates"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError("must be >= 1", name)
        self.x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        if self.x0.shape != (self.objective.dim,):
            raise ConfigurationError(
                f"x0 has length {self.x0.size}, objective dimension is {self.objective.dim}",
                "x0",
            )
        if self.schedule.T != self.T:
            raise ConfigurationError(
                f"schedule horizon {self.schedule.T} != K*H = {self.T}", "schedule"
            )
        if isinstance(self.schedule, (Thm1Schedule, Thm3Schedule)) and self.mu <= 0:
            raise ConfigurationError(
                f"{self.schedule.name} schedule requires a strongly convex objective",
                "schedule",
            )
        bound = 1.0 / (6.0 * self.objective.L)
        worst = float(np.max(self.schedule.gammas()))
        if worst > bound * (1 + 1e-12):
            raise ConfigurationError(
                f"step size {worst:g} exceeds 1/(6L) = {bound:g}", "schedule"
            )

    @property
    def T(self) -> int:
        return self.K * self.H

    @property
    def mu(self) -> float:
        """Strong convexity used by schedules: the decomposition's if attached."""
        if self.decomposition is not None:
            return max(self.objective.mu, self.decomposition.mu)
        return self.objective.mu


@dataclass
class Trajectory:
    """Diagnostics of one run; sequences are indexed t = 0..T."""

    r_sq: np.ndarray
    v: np.ndarray
    f_gap: np.ndarray
    tilde_x: np.ndarray
    tilde_gap: float
    x_bar: np.ndarray | None = None


@dataclass
class ReplicatedStats:
    """Per-iteration means and standard errors over replicates.

    Standard errors are None for a single replicate. ``samples`` keeps the
    per-replicate arrays (shape (replicates, T+1)) for paired statistics.
    """

    replicates: int
    r_sq_mean: np.ndarray
    v_mean: np.ndarray
    f_gap_mean: np.ndarray
    tilde_gap_mean: float
    r_sq_se: np.ndarray | None = None
    v_se: np.ndarray | None = None
    f_gap_se: np.ndarray | None = None
    tilde_gap_se: float | None = None
    samples: dict[str, np.ndarray] = field(default_factory=dict, repr=False)


def worker_mean(states: np.ndarray) -> np.ndarray:
    """Mean over the worker axis (-2), taken relative to the first worker.

    Identical rows give back that row exactly, which keeps the consensus
    deviation at exactly zero right after communication.
    """
    ref = states[..., :1, :]
    return ref[..., 0, :] + np.mean(states - ref, axis=-2)


def consensus_deviation(worker_states) -> np.ndarray | float:
    """V = (1/M) sum_m |x_m - x_bar|^2 over the worker axis (-2)."""
    states = np.asarray(worker_states, dtype=float)
    if states.ndim == 1:
        states = states[:, None]
    dev = states - worker_mean(states)[..., None, :]
    return np.mean(np.sum(dev**2, axis=-1), axis=-1)


def local_step(states: np.ndarray, grads: np.ndarray, gamma: float, communicate: bool):
    """One iteration of Local SGD on (..., M, d) states given sampled gradients."""
    moved = states - gamma * grads
    if communicate:
        return np.broadcast_to(worker_mean(moved)[..., None, :], moved.shape).copy()
    return moved


def _draw_chunk(streams, n, d, construction, parallel):
    """Noise for ``n`` iterations: directions (R, n, M, d) and signs (R, n, M)."""
    R, M = len(streams), len(streams[0])
    U = np.empty((R, n, M, d))
    S = np.empty((R, n, M))

    def fill(idx):
        r, m = divmod(idx, M)
        U[r, :, m, :], S[r, :, m] = streams[r][m].draw(n, d, construction)

    if parallel:
        with ThreadPoolExecutor() as pool:
            list(pool.map(fill, range(R * M)))
    else:
        for idx in range(R * M):
            fill(idx)
    return U, S


def simulate(config: RunConfig, replicates=None, keep_path: bool = False) -> dict:
    """Run the given replicate indices together; returns per-replicate arrays."""
    reps = list(range(config.replicates)) if replicates is None else list(replicates)
    obj, sched, noise = config.objective, config.schedule, config.noise
    T, M, H, d, R = config.T, config.M, config.H, obj.dim, len(reps)
    x_star, f_star = obj.x_star, obj.f_star

    X = np.broadcast_to(config.x0, (R, M, d)).copy()
    stochastic = not noise.deterministic
    streams = [[RngStream(config.seed, m, r) for m in range(M)] for r in reps]
    chunk = max(1, min(T, _CHUNK_BUDGET // (R * M * d)))

    r_sq = np.empty((R, T + 1))
    v = np.empty((R, T + 1))
    f_gap = np.empty((R, T + 1))
    path = np.empty((R, T + 1, d)) if keep_path else None
    tilde = np.zeros((R, d))
    norm_sum = 0.0
    start = sched.window_start

    def record(t, states):
        xbar = worker_mean(states)
        r_sq[:, t] = np.sum((xbar - x_star) ** 2, axis=-1)
        v[:, t] = consensus_deviation(states)
        f_gap[:, t] = obj.value(xbar) - f_star
        if keep_path:
            path[:, t] = xbar
        return xbar

    for t in range(T):
        if stochastic and t % chunk == 0:
            U, S = _draw_chunk(streams, min(chunk, T - t), d, noise.construction, config.parallel)
        xbar = record(t, X)
        if t >= start:
            norm_sum = 1.0 if t == start else 1.0 + norm_sum / sched.weight_ratio(t)
            tilde += (xbar - tilde) / norm_sum
        G = obj.grad(X)
        if stochastic:
            k = t % chunk
            G = perturb(noise, G, U[:, k], S[:, k])
        X = local_step(X, G, sched.gamma(t), (t + 1) % H == 0)
    record(T, X)

    return {
        "r_sq": r_sq,
        "v": v,
        "f_gap": f_gap,
        "tilde_x": tilde,
        "tilde_gap": obj.value(tilde) - f_star,
        "x_bar": path,
    }


def run(config: RunConfig, replicate: int = 0, keep_path: bool = True) -> Trajectory:
    out = simulate(config, [replicate], keep_path=keep_path)
    return Trajectory(
        r_sq=out["r_sq"][0],
        v=out["v"][0],
        f_gap=out["f_gap"][0],
        tilde_x=out["tilde_x"][0],
        tilde_gap=float(out["tilde_gap"][0]),
        x_bar=None if out["x_bar"] is None else out["x_bar"][0],
    )


def _mean_se(a: np.ndarray):
    # shifted by the first sample so identical replicates give exactly zero spread
    n = a.shape[0]
    dev = a - a[:1]
    mean = a[0] + dev.mean(axis=0)
    if n < 2:
        return mean, None
    centered = dev - dev.mean(axis=0)
    return mean, np.sqrt(np.sum(centered**2, axis=0) / (n - 1)) / math.sqrt(n)


def run_replicated(config: RunConfig) -> ReplicatedStats:
    out = simulate(config)
    r_mean, r_se = _mean_se(out["r_sq"])
    v_mean, v_se = _mean_se(out["v"])
    f_mean, f_se = _mean_se(out["f_gap"])
    g_mean, g_se = _mean_se(np.asarray(out["tilde_gap"]))
    return ReplicatedStats(
        replicates=config.replicates,
        r_sq_mean=r_mean,
        v_mean=v_mean,
        f_gap_mean=f_mean,
        tilde_gap_mean=float(g_mean),
        r_sq_se=r_se,
        v_se=v_se,
        f_gap_se=f_se,
        tilde_gap_se=None if g_se is None else float(g_se),
        samples={k: out[k] for k in ("r_sq", "v", "f_gap", "tilde_gap")},
    )
