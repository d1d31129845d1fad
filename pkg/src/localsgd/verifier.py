"""Numerical checks of the descent, variance and consensus lemmas behind Local SGD.

Each check evaluates both sides of an (in)equality and reports the slack
``rhs - lhs``. Deterministic checks fail when any slack drops below
``-DET_TOL``; Monte-Carlo checks fail when a mean slack drops below
``-MC_SIGMAS`` standard errors. Identities report ``-|lhs - rhs|``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, replace

import numpy as np

from .decomposition import (
    Decomposition,
    natural_decomposition,
    optimal_convex_decomposition,
    taylor_decomposition,
)
from .engine import (
    RunConfig,
    consensus_deviation,
    local_step,
    simulate,
    worker_mean,
)
from .errors import PreconditionError, UnsupportedOperationError
from .objectives import (
    Analytic1D,
    Composite,
    LogCosh,
    LogLossL2,
    Objective,
    Quadratic,
    Separable,
    max_abs_third_derivative,
)
from .oracle import NoiseModel, RngStream, perturb
from .schedules import ConstantSchedule, InverseTimeSchedule, Thm3Schedule

DET_TOL = 1e-9
IDENTITY_TOL = 1e-10
MC_SIGMAS = 3.0
ZETA_CAP = 11.0 / 12.0

SUITES = ("identities", "descent", "variance", "vt", "recurrence", "epsdecay")


@dataclass
class LemmaReport:
    lemma_id: str
    trials: int
    min_slack: float
    violations: int
    mc_std_error: float | None = None
    tolerance: float = DET_TOL
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


def deterministic_report(lemma_id, slacks, tol=DET_TOL, note="") -> LemmaReport:
    slacks = np.asarray(slacks, dtype=float).ravel()
    bad = int(np.count_nonzero(~(slacks >= -tol)))
    return LemmaReport(lemma_id, slacks.size, float(np.min(slacks)), bad, None, tol, note)


def monte_carlo_report(lemma_id, slack_samples, note="", tol=1e-12) -> LemmaReport:
    """Report for per-sample slacks of shape (samples,) or (samples, checkpoints).

    A checkpoint fails when its mean slack is below -MC_SIGMAS standard errors
    (or below -tol when the standard error vanishes).
    """
    s = np.asarray(slack_samples, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    n = s.shape[0]
    mean = s.mean(axis=0)
    se = s.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    margin = np.maximum(MC_SIGMAS * se, tol)
    bad = ~(mean >= -margin)
    worst = int(np.argmin(mean + margin))
    return LemmaReport(
        lemma_id, n, float(mean[worst]), int(np.count_nonzero(bad)), float(se[worst]), tol, note
    )


# per-state evaluation


def _stats(dec: Decomposition, states):
    states = np.asarray(states, dtype=float)
    obj = dec.objective
    x_star = obj.x_star
    xbar = worker_mean(states)
    r_bar = np.mean(dec.r_grad(states), axis=-2)
    g_bar = np.mean(obj.grad(states), axis=-2)
    return states, obj, x_star, xbar, r_bar, g_bar


def _dot(a, b):
    return float(np.dot(np.ravel(a), np.ravel(b)))


def lem1_terms(dec: Decomposition, states, gamma: float) -> tuple[float, float]:
    states, obj, x_star, xbar, r_bar, g_bar = _stats(dec, states)
    e = xbar - x_star
    lhs = _dot(e - gamma * g_bar, e - gamma * g_bar)
    inner = dec.q_grad(xbar) + r_bar - dec.q_grad(x_star) - dec.r_grad(x_star)
    rhs = (
        _dot(e, e)
        + gamma**2 * _dot(inner, inner)
        - 2 * gamma * _dot(e, dec.q_grad(xbar))
        - 2 * gamma * _dot(e, r_bar)
    )
    return lhs, rhs


def check_lem1_identity(dec: Decomposition, states, gamma: float) -> LemmaReport:
    lhs, rhs = lem1_terms(dec, states, gamma)
    return deterministic_report("lem1_identity", [-abs(lhs - rhs)], IDENTITY_TOL)


def compute_zeta(L_Q: float, L_R: float, gamma: float) -> float:
    """Positive root of L_Q z^2 + (L_Q - L_R - 1/(2 gamma)) z - L_R = 0.

    When gamma <= 1/(6 (L_Q + L_R)) the root satisfies
    gamma L_Q (1 + z) <= 11/12, which is asserted.
    """
    if not L_Q > 0:
        raise UnsupportedOperationError("zeta is undefined without a quadratic part (L_Q = 0)")
    if not gamma > 0:
        raise PreconditionError("gamma must be positive")
    B = L_Q - L_R - 1.0 / (2.0 * gamma)
    disc = math.sqrt(B * B + 4.0 * L_Q * L_R)
    if B <= 0:
        zeta = (-B + disc) / (2.0 * L_Q)
    else:
        # the textbook formula cancels here; use the conjugate form
        zeta = 2.0 * L_R / (B + disc)
    if gamma <= 1.0 / (6.0 * (L_Q + L_R)):
        cap = gamma * L_Q * (1.0 + zeta)
        if cap > ZETA_CAP * (1 + 1e-12):
            raise AssertionError(f"gamma L_Q (1 + zeta) = {cap} exceeds 11/12")
    return zeta


def zeta_balance_residual(L_Q: float, L_R: float, gamma: float) -> float:
    """Relative residual of gamma L_R (1 + 1/z) + 1/2 = gamma L_Q (1 + z)."""
    z = compute_zeta(L_Q, L_R, gamma)
    lhs = gamma * L_R * (1.0 + 1.0 / z) + 0.5 if L_R else 0.5
    rhs = gamma * L_Q * (1.0 + z)
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def descent_terms(dec: Decomposition, states, gamma: float) -> dict[str, tuple[float, float]]:
    """(lhs, rhs) of the four descent inequalities and the noiseless one-step bound."""
    states, obj, x_star, xbar, r_bar, g_bar = _stats(dec, states)
    e = xbar - x_star
    V = float(consensus_deviation(states))
    nsq = _dot(e, e)
    Q_bar_x, Q_star = float(dec.q_value(xbar)), float(dec.q_value(x_star))
    R_bar = float(np.mean(dec.r_value(states)))
    R_star = float(dec.r_value(x_star))
    gQ_star, gR_star = dec.q_grad(x_star), dec.r_grad(x_star)
    gQ_bar = dec.q_grad(xbar)
    out = {}

    if dec.L_Q > 0:
        zeta = compute_zeta(dec.L_Q, dec.L_R, gamma)
        inner = gQ_bar + r_bar - gQ_star - gR_star
        rhs = 2 * dec.L_Q * (1 + zeta) * (Q_bar_x - Q_star - _dot(gQ_star, e))
        if dec.L_R > 0:
            rhs += 2 * dec.L_R * (1 + 1 / zeta) * (R_bar - R_star - _dot(gR_star, e))
        out["g_t"] = (_dot(inner, inner), rhs)

    out["inner_1"] = (-2 * _dot(e, gQ_bar), 2 * Q_star - 2 * Q_bar_x - dec.mu_Q * nsq)
    out["inner_2"] = (
        -2 * _dot(e, r_bar),
        -(R_bar - R_star) + 2 * dec.L_R * V - dec.mu_R * nsq - _dot(gR_star, e),
    )
    f_gap = float(obj.value(xbar)) - obj.f_star
    ab_rhs = (1 - gamma * dec.mu) * nsq - gamma / 6 * f_gap + 2 * gamma * dec.L_R * V
    step = e - gamma * g_bar
    out["AB"] = (_dot(step, step), ab_rhs)
    for communicate in (False, True):
        nxt = local_step(states, obj.grad(states), gamma, communicate)
        d_next = worker_mean(nxt) - x_star
        key = "very_main_sigma0_" + ("avg" if communicate else "local")
        out[key] = (_dot(d_next, d_next), ab_rhs)
    return out


def check_descent_inequalities(
    dec: Decomposition, states, gamma: float
) -> dict[str, LemmaReport]:
    if gamma > (1 + 1e-12) / (6 * dec.objective.L):
        raise PreconditionError(f"gamma={gamma} exceeds 1/(6L)")
    if not dec.convex_residual:
        raise PreconditionError("descent inequalities need a convex residual")
    return {
        k: deterministic_report(k, [rhs - lhs])
        for k, (lhs, rhs) in descent_terms(dec, states, gamma).items()
    }


def check_variance_bound(
    model: NoiseModel, obj: Objective, states, mc_trials: int = 10_000, seed: int = 0
) -> LemmaReport:
    """Monte-Carlo E|mean sampled grad - mean grad|^2 against its analytic bound."""
    if mc_trials < 1000:
        raise PreconditionError("need at least 1000 Monte-Carlo trials")
    states = np.asarray(states, dtype=float)
    M, d = states.shape
    g = obj.grad(states)
    if model.deterministic:
        lhs = np.zeros(mc_trials)
    else:
        U = np.empty((mc_trials, M, d))
        S = np.empty((mc_trials, M))
        for m in range(M):
            U[:, m], S[:, m] = RngStream(seed, m).draw(mc_trials, d, model.construction)
        dev = np.mean(perturb(model, g, U, S) - g, axis=1)
        lhs = np.sum(dev**2, axis=-1)
    xbar = worker_mean(states)
    V = float(consensus_deviation(states))
    r2 = float(np.sum((xbar - obj.x_star) ** 2))
    c = model.rho * obj.L**2 / M
    rhs = model.sigma**2 / M + c * V + c * r2
    return monte_carlo_report("rho_2", rhs - lhs)


def check_very_main_conditional(
    dec: Decomposition,
    model: NoiseModel,
    states,
    gamma: float,
    communicate: bool,
    mc_trials: int = 10_000,
    seed: int = 0,
) -> LemmaReport:
    """One stochastic step from a frozen ensemble against the descent bound.

    The bound uses the exact conditional noise variance of the mean gradient,
    (sigma^2 + rho * mean_m |grad_m|^2) / M.
    """
    states = np.asarray(states, dtype=float)
    obj = dec.objective
    M, d = states.shape
    g = obj.grad(states)
    U = np.empty((mc_trials, M, d))
    S = np.empty((mc_trials, M))
    for m in range(M):
        U[:, m], S[:, m] = RngStream(seed, m).draw(mc_trials, d, model.construction)
    G = perturb(model, np.broadcast_to(g, (mc_trials, M, d)), U, S)
    nxt = local_step(np.broadcast_to(states, G.shape), G, gamma, communicate)
    lhs = np.sum((worker_mean(nxt) - obj.x_star) ** 2, axis=-1)
    xbar = worker_mean(states)
    nsq = float(np.sum((xbar - obj.x_star) ** 2))
    f_gap = float(obj.value(xbar)) - obj.f_star
    V = float(consensus_deviation(states))
    noise_var = (model.sigma**2 + model.rho * float(np.mean(np.sum(g**2, axis=-1)))) / M
    rhs = (
        (1 - gamma * dec.mu) * nsq
        + gamma**2 * noise_var
        - gamma / 6 * f_gap
        + 2 * gamma * dec.L_R * V
    )
    return monte_carlo_report("very_main_conditional", rhs - lhs)


# trajectory-level Monte-Carlo checks


def _consensus_bound(config: RunConfig, case: str, r_sq: np.ndarray) -> np.ndarray:
    """Right-hand side of the consensus bound, shape (replicates, T+1)."""
    sched, noise = config.schedule, config.noise
    T, H, M = config.T, config.H, config.M
    L, mu = config.objective.L, config.mu
    sigma2, rho = noise.sigma**2, noise.rho
    gam = sched.gammas()
    R = r_sq.shape[0]
    bound = np.zeros((R, T + 1))
    if case in ("a", "b", "c") and rho != 0:
        raise PreconditionError(f"consensus bound ({case}) needs rho = 0")
    if case == "a":
        if not np.all(gam == gam[0]):
            raise PreconditionError("bound (a) needs a constant step size")
        bound[:] = (H - 1) * sigma2 * gam[0] ** 2
    elif case == "b":
        if not isinstance(sched, InverseTimeSchedule):
            raise PreconditionError("bound (b) needs gamma_t = 2/(mu (shift + t + 1))")
        bound[:, 1:] = 2 * (M - 1) * (H - 1) * sigma2 * gam[:T] ** 2 / M
    elif case == "c":
        if np.any(np.diff(gam) < 0):
            raise PreconditionError("bound (c) needs non-decreasing step sizes")
        idx = np.maximum(np.arange(T + 1) - H + 1, 0).clip(max=T - 1)
        bound[:] = 2 * (M - 1) * (H - 1) * sigma2 * gam[idx] ** 2 / M
    elif case == "d":
        if not mu > 0:
            raise PreconditionError("bound (d) needs mu > 0")
        cap = 1 / (6 * L) if rho == 0 else min(mu / (3 * rho * L**2), 1 / (6 * L))
        if np.max(gam) > cap * (1 + 1e-12):
            raise PreconditionError(f"bound (d) needs gamma <= {cap:g}")
        acc = np.zeros(R)
        for t in range(T):
            acc = (1 - gam[t] * mu / 2) * acc + rho * gam[t] ** 2 * L**2 * r_sq[:, t] + gam[t] ** 2 * sigma2
            if (t + 1) % H == 0:
                acc = np.zeros(R)
            bound[:, t + 1] = acc
    else:
        raise ValueError(f"unknown case {case!r}")
    return bound


def check_vt_bounds(config: RunConfig, case: str, mc_replicates: int = 500) -> LemmaReport:
    """Empirical E[V_t] at every t against consensus bound (a), (b), (c) or (d)."""
    cfg = replace(config, replicates=mc_replicates)
    out = simulate(cfg)
    bound = _consensus_bound(cfg, case, out["r_sq"])
    return monte_carlo_report(f"V_t({case})", bound - out["v"])


def check_recurrence(config: RunConfig, mc_replicates: int = 500) -> LemmaReport:
    """One-step recurrence for E|x_bar_t - x*|^2 with the -(gamma/6) gap term.

    Slacks are paired per replicate between consecutive iterates; the
    residual smoothness comes from the attached decomposition (0 for a
    quadratic without one).
    """
    noise = config.noise
    if noise.rho != 0:
        raise PreconditionError("the recurrence needs rho = 0")
    mu = config.mu
    if not mu > 0:
        raise PreconditionError("the recurrence needs mu > 0")
    gam = config.schedule.gammas()
    if not np.all(gam == gam[0]):
        raise PreconditionError("the recurrence needs a constant step size")
    g = gam[0]
    if config.decomposition is not None:
        L_R = config.decomposition.L_R
    elif isinstance(config.objective, Quadratic):
        L_R = 0.0
    else:
        raise PreconditionError("attach a decomposition to supply L_R")
    out = simulate(replace(config, replicates=mc_replicates))
    r, f = out["r_sq"], out["f_gap"]
    s2, H, M = noise.sigma**2, config.H, config.M
    rhs = (1 - g * mu) * r[:, :-1] + g**2 * s2 / M - g / 6 * f[:, :-1] + 2 * L_R * (H - 1) * g**3 * s2
    return monte_carlo_report("recurrence", rhs - r[:, 1:])


def check_eps_decay(obj: Objective, radius: float = 1.0, grid: int = 200, seed: int = 0) -> LemmaReport:
    """Residual gradient decay and local Lipschitz bound for the Taylor split.

    With C = 6 max|F'''| on the test ball:
    |grad R(x)| <= C/2 |x - x*|^2 and, whenever |y - x*| <= |x - x*|,
    |grad R(x) - grad R(y)| <= C |x - x*| |x - y|.
    """
    if not obj.twice_differentiable:
        raise UnsupportedOperationError(f"{obj.kind} has no Lipschitz Hessian")
    dec = taylor_decomposition(obj)
    x_star = obj.x_star
    if isinstance(obj, Quadratic):
        C = 0.0
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((grid, obj.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        pts = x_star + dirs * radius * rng.random((grid, 1))
    elif isinstance(obj, Analytic1D):
        C = 6.0 * max_abs_third_derivative(obj, x_star, radius)
        pts = (x_star[0] + np.linspace(-radius, radius, grid))[:, None]
    else:
        raise UnsupportedOperationError(f"eps decay check does not support {obj.kind}")
    gR = dec.r_grad(pts)
    dist = np.linalg.norm(pts - x_star, axis=-1)
    decay = C / 2 * dist**2 - np.linalg.norm(gR, axis=-1)
    # pairs (x, y) with |y - x*| <= |x - x*|
    ix, iy = np.nonzero(dist[None, :] <= dist[:, None])
    lip = C * dist[ix] * np.linalg.norm(pts[ix] - pts[iy], axis=-1) - np.linalg.norm(
        gR[ix] - gR[iy], axis=-1
    )
    return deterministic_report(
        f"eps_decay[{obj.kind}]", np.concatenate([decay, lip]), note=f"C={C:.6g}"
    )


# randomized instance generators


def random_ball(rng, center, radius, n):
    center = np.asarray(center, dtype=float)
    d = center.size
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return center + dirs * radius * rng.random((n, 1)) ** (1.0 / d)


def random_quadratic(rng, d: int | None = None) -> Quadratic:
    d = int(rng.integers(1, 11)) if d is None else d
    mu = float(rng.uniform(0.1, 2.0))
    L = mu if d == 1 else mu * float(rng.uniform(1.0, 20.0))
    return Quadratic.from_spectrum(
        d, mu, L, seed=int(rng.integers(2**31)), x_star=rng.normal(0, 2, d)
    )


def random_composite(rng, d: int | None = None) -> Composite:
    quad = random_quadratic(rng, d)
    d = quad.dim
    resid = Separable(LogCosh(), d, rng.uniform(0.1, 3.0, d), rng.normal(0, 2, d))
    return Composite(quad, resid)


def random_gamma(rng, L: float) -> float:
    return (1.0 - rng.random()) / (6.0 * L)


def _identity_instance(rng, i: int):
    family = i % 3
    if family == 0:
        obj = random_quadratic(rng)
    elif family == 1:
        obj = LogCosh()
    else:
        obj = LogLossL2()
    dec = taylor_decomposition(obj)
    M = int(rng.integers(1, 9))
    states = random_ball(rng, obj.x_star, 10.0, M)
    return dec, states, random_gamma(rng, obj.L)


def _descent_instance(rng, i: int):
    family = i % 3
    if family == 0:
        dec = taylor_decomposition(random_quadratic(rng))
        radius = 10.0
    elif family == 1:
        dec = natural_decomposition(random_composite(rng))
        radius = 10.0
    else:
        radius = float(rng.uniform(0.5, 3.0))
        dec = optimal_convex_decomposition(LogCosh(), radius)
    obj = dec.objective
    M = int(rng.integers(1, 9))
    states = random_ball(rng, obj.x_star, radius, M)
    return dec, states, random_gamma(rng, obj.L)


# suites


def identity_suite(trials: int = 1000, seed: int = 0) -> list[LemmaReport]:
    rng = np.random.default_rng([seed, 1])
    slacks = []
    for i in range(trials):
        lhs, rhs = lem1_terms(*_identity_instance(rng, i))
        slacks.append(-abs(lhs - rhs))
    return [deterministic_report("lem1_identity", slacks, IDENTITY_TOL)]


def descent_suite(trials: int = 1000, seed: int = 0) -> list[LemmaReport]:
    rng = np.random.default_rng([seed, 2])
    slacks: dict[str, list[float]] = {}
    zeta_slack, balance = [], []
    for i in range(trials):
        dec, states, gamma = _descent_instance(rng, i)
        for k, (lhs, rhs) in descent_terms(dec, states, gamma).items():
            slacks.setdefault(k, []).append(rhs - lhs)
        if dec.L_Q > 0:
            z = compute_zeta(dec.L_Q, dec.L_R, gamma)
            zeta_slack.append(ZETA_CAP - gamma * dec.L_Q * (1 + z))
            balance.append(-zeta_balance_residual(dec.L_Q, dec.L_R, gamma))
    reports = [deterministic_report(k, v) for k, v in slacks.items()]
    reports.append(deterministic_report("zeta_cap", zeta_slack, 0.0))
    reports.append(deterministic_report("zeta_balance", balance, 1e-12))
    return reports


def oracle_moment_report(
    sigma: float, rho: float, draws: int = 100_000, seed: int = 0, d: int = 4
) -> list[LemmaReport]:
    """Mean and second moment of the oracle noise at a point with |grad F|^2 = 4."""
    obj = Quadratic(np.eye(d))
    x = np.full(d, 2.0 / math.sqrt(d))
    model = NoiseModel(sigma, rho)
    g = obj.grad(x)
    u, s = RngStream(seed, 0).draw(draws, d, model.construction)
    noise = perturb(model, np.broadcast_to(g, (draws, d)), u, s) - g
    tag = f"oracle(sigma={sigma:g},rho={rho:g})"
    mean = noise.mean(axis=0)
    se = noise.std(axis=0, ddof=1) / math.sqrt(draws)
    z = np.abs(mean) / se
    mean_rep = LemmaReport(
        f"{tag}:mean", draws, float(-np.max(np.abs(mean))), int(np.sum(z > 4.0)),
        float(se[np.argmax(z)]), note="|mean| <= 4 SE per coordinate",
    )
    sq = np.sum(noise**2, axis=1)
    target = sigma**2 + rho * float(g @ g)
    sq_se = sq.std(ddof=1) / math.sqrt(draws)
    diff = abs(sq.mean() - target)
    moment_rep = LemmaReport(
        f"{tag}:second_moment", draws, float(-diff), int(diff > MC_SIGMAS * sq_se),
        float(sq_se), note=f"target {target:g}",
    )
    return [mean_rep, moment_rep]


def variance_suite(trials: int = 10, seed: int = 0, mc_trials: int = 20_000) -> list[LemmaReport]:
    reports = []
    for sigma, rho in ((1.0, 0.0), (1.0, 1.0), (2.0, 3.0)):
        reports.extend(oracle_moment_report(sigma, rho, seed=seed))
    rng = np.random.default_rng([seed, 3])
    rho2, vm = [], []
    for i in range(trials):
        obj = random_quadratic(rng, 5) if i % 2 == 0 else random_composite(rng, 3)
        dec = (taylor_decomposition if isinstance(obj, Quadratic) else natural_decomposition)(obj)
        M = int(rng.integers(2, 9))
        states = random_ball(rng, obj.x_star, 3.0, M)
        model = NoiseModel(float(rng.uniform(0, 2)), float(rng.choice([0.0, 0.5, 1.0, 3.0])))
        rho2.append(check_variance_bound(model, obj, states, mc_trials, seed + i))
        gamma = random_gamma(rng, obj.L)
        vm.append(
            check_very_main_conditional(dec, model, states, gamma, bool(i % 2), mc_trials, seed + i)
        )
    reports.append(_combine("rho_2", rho2))
    reports.append(_combine("very_main_conditional", vm))
    return reports


def _combine(lemma_id: str, reports: Iterable[LemmaReport]) -> LemmaReport:
    reports = list(reports)
    worst = min(reports, key=lambda r: r.min_slack + MC_SIGMAS * (r.mc_std_error or 0.0))
    return LemmaReport(
        lemma_id,
        sum(r.trials for r in reports),
        worst.min_slack,
        sum(r.violations for r in reports),
        worst.mc_std_error,
        worst.tolerance,
        f"{len(reports)} ensembles",
    )


def reference_quadratic_config(
    H: int = 8, rho: float = 0.0, schedule: str = "constant", seed: int = 0, sigma: float = 1.0
) -> RunConfig:
    """d=5, mu=1, L=10 random quadratic; M=4, T=256; x0 at distance 1 from x*."""
    obj = Quadratic.from_spectrum(5, 1.0, 10.0, seed=seed)
    T, M = 256, 4
    x0 = obj.x_star + np.ones(5) / math.sqrt(5)
    if schedule == "thm3":
        sched = Thm3Schedule(T, 1.0, rho, 10.0, 0.0, H, M, 1.0, sigma)
    else:
        sched = ConstantSchedule(T, 1 / 60, obj.L)
    return RunConfig(obj, sched, NoiseModel(sigma, rho), M, H, T // H, x0, seed=seed)


def vt_suite(replicates: int = 500, seed: int = 0) -> list[LemmaReport]:
    reports = [
        check_vt_bounds(reference_quadratic_config(8, seed=seed), "a", replicates),
        check_vt_bounds(reference_quadratic_config(8, seed=seed), "c", replicates),
        check_vt_bounds(
            reference_quadratic_config(8, rho=1.0, schedule="thm3", seed=seed), "d", replicates
        ),
    ]
    obj = Quadratic.from_spectrum(5, 1.0, 10.0, seed=seed)
    T, H = 256, 8
    sched_b = InverseTimeSchedule(T, obj.mu, 12 * obj.L / obj.mu)
    cfg_b = RunConfig(
        obj, sched_b, NoiseModel(1.0, 0.0), 4, H, T // H, obj.x_star + 0.5, seed=seed
    )
    reports.append(check_vt_bounds(cfg_b, "b", replicates))
    return reports


def recurrence_suite(replicates: int = 500, seed: int = 0) -> list[LemmaReport]:
    reports = []
    det = reference_quadratic_config(1, seed=seed, sigma=0.0)
    rep = check_recurrence(det, 1)
    rep.lemma_id = "recurrence[quadratic,sigma=0]"
    reports.append(rep)
    rep = check_recurrence(reference_quadratic_config(8, seed=seed), replicates)
    rep.lemma_id = "recurrence[quadratic,eps=0]"
    reports.append(rep)
    obj = LogCosh()
    dec = optimal_convex_decomposition(obj, 2.0)
    T, H = 128, 4
    cfg = RunConfig(
        obj, ConstantSchedule(T, 1 / 6, obj.L), NoiseModel(0.5, 0.0), 4, H, T // H,
        np.array([1.0]), seed=seed, decomposition=dec,
    )
    rep = check_recurrence(cfg, replicates)
    rep.lemma_id = "recurrence[logcosh,ball=2]"
    reports.append(rep)
    return reports


def epsdecay_suite(trials: int = 200, seed: int = 0) -> list[LemmaReport]:
    grid = max(20, min(trials, 400))
    return [
        check_eps_decay(LogCosh(), 1.0, grid, seed),
        check_eps_decay(LogLossL2(), 1.0, grid, seed),
        check_eps_decay(Quadratic.from_spectrum(3, 1.0, 5.0, seed=seed), 1.0, grid, seed),
    ]


def run_suite(
    name: str, trials: int = 1000, replicates: int = 500, seed: int = 0
) -> list[LemmaReport]:
    runners: dict[str, Callable[[], list[LemmaReport]]] = {
        "identities": lambda: identity_suite(trials, seed),
        "descent": lambda: descent_suite(trials, seed),
        "variance": lambda: variance_suite(10, seed),
        "vt": lambda: vt_suite(replicates, seed),
        "recurrence": lambda: recurrence_suite(replicates, seed),
        "epsdecay": lambda: epsdecay_suite(200, seed),
    }
    if name == "all":
        return [r for key in SUITES for r in runners[key]()]
    if name not in runners:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return runners[name]()
