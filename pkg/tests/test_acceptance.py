"""Acceptance criteria A1-A10, one test (and one summary line) each."""

import math
import time

import numpy as np

from localsgd.cli import main
from localsgd.decomposition import epsilon_on_ball
from localsgd.engine import RunConfig, run, run_replicated
from localsgd.objectives import LogCosh, LogLossL2, Piecewise, Quadratic
from localsgd.oracle import NoiseModel
from localsgd.schedules import (
    ConstantSchedule,
    Thm1Schedule,
    gamma_thm1,
    gamma_thm2,
    gamma_thm3,
    thm1_shift,
    thm3_C,
    window_weight_sum,
)
from localsgd.verifier import (
    check_eps_decay,
    check_variance_bound,
    check_vt_bounds,
    descent_suite,
    identity_suite,
    oracle_moment_report,
    random_ball,
    random_composite,
    random_quadratic,
    reference_quadratic_config,
)


def _fails(reports):
    return [r.lemma_id for r in reports if not r.passed]


def test_a1_identity_suite(acceptance):
    t0 = time.perf_counter()
    (rep,) = identity_suite(1000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and rep.trials == 1000 and rep.min_slack >= -1e-10 and elapsed < 10
    acceptance("A1", ok, f"max |lhs-rhs| = {-rep.min_slack:.2e} over {rep.trials}, {elapsed:.1f}s")
    assert ok


def test_a2_descent_suite(acceptance):
    t0 = time.perf_counter()
    reps = descent_suite(1000, seed=0)
    elapsed = time.perf_counter() - t0
    ids = {r.lemma_id for r in reps}
    needed = {"g_t", "inner_1", "inner_2", "AB", "very_main_sigma0_local",
              "very_main_sigma0_avg", "zeta_cap"}
    ok = needed <= ids and not _fails(reps) and elapsed < 30
    worst = min(r.min_slack for r in reps if r.lemma_id in needed - {"zeta_cap"})
    acceptance("A2", ok, f"0 violations in {len(reps)} checks, min slack {worst:.2e}, {elapsed:.1f}s")
    assert ok, _fails(reps)


def test_a3_oracle_moments(acceptance):
    t0 = time.perf_counter()
    reps = []
    for sigma, rho in ((1.0, 0.0), (1.0, 1.0), (2.0, 3.0)):
        reps += oracle_moment_report(sigma, rho, draws=100_000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = not _fails(reps) and elapsed < 10
    acceptance("A3", ok, f"{len(reps)} moment checks, {elapsed:.1f}s")
    assert ok, _fails(reps)


def _tilde_stats(obj, H, seed=1):
    T, M = 256, 4
    x0 = obj.x_star + np.ones(obj.dim) / math.sqrt(obj.dim)
    cfg = RunConfig(
        obj, ConstantSchedule(T, 1 / (6 * obj.L), obj.L), NoiseModel(1.0, 0.0),
        M, H, T // H, x0, seed=seed, replicates=200,
    )
    st = run_replicated(cfg)
    return st.tilde_gap_mean, st.tilde_gap_se


def _pooled(a, b):
    return math.sqrt(a[1] ** 2 + b[1] ** 2)


def test_a4_quadratic_frequency_independence(acceptance):
    t0 = time.perf_counter()
    obj = Quadratic.from_spectrum(5, 1.0, 10.0, seed=0)
    stats = {H: _tilde_stats(obj, H) for H in (1, 16, 256)}
    elapsed = time.perf_counter() - t0
    ratios = [
        abs(stats[a][0] - stats[b][0]) / _pooled(stats[a], stats[b])
        for a, b in ((1, 16), (1, 256), (16, 256))
    ]
    ok = max(ratios) < 3 and elapsed < 120
    means = ", ".join(f"H={h}: {m:.6f}" for h, (m, _) in stats.items())
    acceptance("A4", ok, f"{means}; max diff {max(ratios):.2f} pooled SE, {elapsed:.1f}s")
    assert ok


def test_a5_epsilon_sensitivity(acceptance):
    t0 = time.perf_counter()
    obj = LogLossL2()
    Hs = (1, 4, 16, 64, 256)
    stats = [_tilde_stats(obj, H) for H in Hs]
    elapsed = time.perf_counter() - t0
    monotone = all(b[0] >= a[0] - _pooled(a, b) for a, b in zip(stats, stats[1:]))
    z = (stats[-1][0] - stats[0][0]) / _pooled(stats[0], stats[-1])
    ok = obj.mu >= 0.06 and monotone and z > 3 and elapsed < 180
    means = ", ".join(f"{m:.5f}" for m, _ in stats)
    acceptance("A5", ok, f"means [{means}], H=256 vs H=1: {z:.1f} SE, {elapsed:.1f}s")
    assert ok


def test_a6_variance_suite(acceptance):
    t0 = time.perf_counter()
    rep_a = check_vt_bounds(reference_quadratic_config(H=8), "a", 500)
    rep_d = check_vt_bounds(
        reference_quadratic_config(H=8, rho=1.0, schedule="thm3"), "d", 500
    )
    rng = np.random.default_rng(6)
    rho2 = []
    for i in range(10):
        obj = random_quadratic(rng, 5) if i % 2 == 0 else random_composite(rng, 3)
        states = random_ball(rng, obj.x_star, 3.0, int(rng.integers(2, 9)))
        model = NoiseModel(float(rng.uniform(0.2, 2)), float(rng.choice([0.0, 1.0, 3.0])))
        rho2.append(check_variance_bound(model, obj, states, 20_000, seed=i))
    elapsed = time.perf_counter() - t0
    reps = [rep_a, rep_d, *rho2]
    ok = not _fails(reps) and elapsed < 180
    acceptance(
        "A6", ok,
        f"V_t(a) min slack {rep_a.min_slack:.2e}, V_t(d) ok={rep_d.passed}, "
        f"rho_2 {sum(r.passed for r in rho2)}/10, {elapsed:.1f}s",
    )
    assert ok


def test_a7_schedule_formulas(acceptance):
    rel = lambda a, b: abs(a - b) <= 1e-12 * abs(b)  # noqa: E731
    checks = [
        rel(gamma_thm1(0, 1, 1.0, 1.0), 1 / 6),
        rel(gamma_thm1(10, 100, 1.0, 10.0), 1 / 60),
        rel(gamma_thm1(60, 100, 1.0, 10.0), 1 / 65),
        thm1_shift(100, 1.0, 10.0) == 70.0,
        rel(gamma_thm2(36, 1.0, 1.0, 1.0, 1, 1, 0.0), 1 / 6),
        rel(gamma_thm2(4, 1.0, 1.0, 1.0, 4, 2, 1.0), 1 / 6),
        rel(gamma_thm2(50, 2.0, 1.0, 0.0, 4, 2, 1.0), 1 / 12),
        thm3_C(1.0, 1.0) == 2.0,
        rel(gamma_thm3(100, 1.0, 1.0, 2.0, 1.0, 4, 1, 1.0, 1.0), math.log(1e4) / 200),
        rel(gamma_thm3(10, 1.0, 0.0, 1.0, 0.0, 1, 1, 1.0, 1.0), 1 / 6),
    ]
    sums = []
    for T in (4, 10, 100, 1000):
        s = Thm1Schedule(T, 1.0, 1.0)
        sums.append(not s.short_horizon and window_weight_sum(s) >= T**2 / 16)
    ok = all(checks) and all(sums)
    acceptance("A7", ok, f"{sum(checks)}/{len(checks)} step sizes, {sum(sums)}/4 weight sums")
    assert ok


def test_a8_epsilon_reproduction(acceptance):
    pw = [epsilon_on_ball(Piecewise(), b) for b in (0.01, 0.1, 1.0)]
    lc = [epsilon_on_ball(LogCosh(), b) for b in (0.6, 0.4, 0.1)]
    decay = [check_eps_decay(LogCosh(), 1.0), check_eps_decay(LogLossL2(), 1.0)]
    ok = (
        all(abs(e - 0.4) <= 1e-9 for e in pw)
        and lc[0] > lc[1] > lc[2]
        and lc[2] / lc[0] < 0.05
        and all(r.passed and r.violations == 0 for r in decay)
    )
    acceptance("A8", ok, f"piecewise eps {pw}, logcosh ratio {lc[2] / lc[0]:.4f}")
    assert ok


def test_a9_deterministic_linear_rate(acceptance):
    t0 = time.perf_counter()
    obj = Quadratic.from_spectrum(5, 1.0, 10.0, seed=0)
    gamma, T = 1 / 60, 600
    cfg = RunConfig(
        obj, ConstantSchedule(T, gamma, obj.L), NoiseModel(), 1, 1, T,
        obj.x_star + np.ones(5) / math.sqrt(5),
    )
    traj = run(cfg, keep_path=False)
    elapsed = time.perf_counter() - t0
    r = traj.r_sq
    contraction = np.all(r[1:] <= (1 - gamma) * r[:-1] * (1 + 1e-12))
    final = traj.f_gap[T] <= math.exp(-gamma * T) * traj.f_gap[0] * obj.L / obj.mu
    ok = bool(contraction and final and elapsed < 1)
    worst = float(np.max(r[1:] / r[:-1]))
    acceptance("A9", ok, f"max ratio {worst:.6f} <= {1 - gamma:.6f}, {elapsed:.2f}s")
    assert ok


CONFIG = """\
[objective]
kind = quadratic
d = 5
mu = 1
L = 10
seed = 0

[noise]
sigma = 1
rho = 0.5

[schedule]
kind = thm3

[run]
M = 4
H = 8
K = 16
seed = 3
replicates = 20
parallel = {parallel}
"""


def test_a10_determinism(tmp_path, acceptance):
    outs = []
    for parallel in ("false", "true", "false", "true"):
        cfgp = tmp_path / f"c_{parallel}.ini"
        cfgp.write_text(CONFIG.format(parallel=parallel))
        out = tmp_path / f"o{len(outs)}.csv"
        assert main(["run", "--config", str(cfgp), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    ok = len(set(outs)) == 1
    acceptance("A10", ok, f"{len(outs)} runs, {len(outs[0])} bytes each")
    assert ok
