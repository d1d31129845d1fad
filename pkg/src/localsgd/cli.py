"""Command line interface: ``localsgd {run,sweep,verify,epsilon}``.

All outputs are CSV with a leading ``#`` metadata line. Floats are written
with ``repr`` (shortest round-trip form), so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, SweepSpec, load_config, parse_list
from .decomposition import epsilon_on_ball, optimal_convex_decomposition
from .engine import run_replicated
from .errors import LocalSGDError
from .objectives import ANALYTIC_KINDS, make_objective
from .verifier import SUITES, run_suite

RUN_COLUMNS = ("t", "r_sq_mean", "r_sq_se", "v_mean", "v_se", "f_gap_mean", "f_gap_se")
SWEEP_COLUMNS = ("param_value", "tilde_gap_mean", "tilde_gap_se", "final_r_sq_mean")
EPSILON_COLUMNS = ("radius", "epsilon_nonconvex", "epsilon_convex")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _emit(rows, columns, meta: str, out) -> None:
    buf = io.StringIO()
    buf.write(f"# {meta}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    text = buf.getvalue()
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _se(arr, t):
    return None if arr is None else arr[t]


def cmd_run(args) -> int:
    exp = load_config(args.config)
    stats = run_replicated(exp.build())
    rows = []
    for t in range(stats.r_sq_mean.size):
        rows.append(
            (
                t,
                stats.r_sq_mean[t], _se(stats.r_sq_se, t),
                stats.v_mean[t], _se(stats.v_se, t),
                stats.f_gap_mean[t], _se(stats.f_gap_se, t),
            )
        )
    rows.append(("tilde", None, None, None, None, stats.tilde_gap_mean, stats.tilde_gap_se))
    meta = f"config_hash={exp.config_hash()} seed={exp.seed} replicates={stats.replicates}"
    _emit(rows, RUN_COLUMNS, meta, args.out)
    finite = all(
        np.all(np.isfinite(a)) for a in (stats.r_sq_mean, stats.v_mean, stats.f_gap_mean)
    ) and math.isfinite(stats.tilde_gap_mean)
    if not finite:
        print("error: run produced non-finite values", file=sys.stderr)
        return 3
    return 0


def cmd_sweep(args) -> int:
    exp = load_config(args.config)
    spec = SweepSpec(exp, args.param, parse_list(args.values), args.fix_T)
    rows = []
    for value, _, cfg in spec.configs():
        stats = run_replicated(cfg)
        rows.append((value, stats.tilde_gap_mean, stats.tilde_gap_se, stats.r_sq_mean[-1]))
    meta = (
        f"config_hash={exp.config_hash()} seed={exp.seed} param={args.param}"
        f" fix_T={str(args.fix_T).lower()}"
    )
    _emit(rows, SWEEP_COLUMNS, meta, args.out)
    ok = all(math.isfinite(r[1]) for r in rows)
    return 0 if ok else 3


def cmd_verify(args) -> int:
    reports = run_suite(args.suite, args.trials, args.replicates, args.seed)
    header = f"{'lemma_id':44s} {'trials':>8s} {'min_slack':>12s} {'violations':>10s}  status"
    print(header)
    print("-" * len(header))
    for r in reports:
        print(f"{r.lemma_id:44s} {r.trials:8d} {r.min_slack:12.4e} {r.violations:10d}  {r.status}")
    failed = sum(not r.passed for r in reports)
    print(f"{len(reports) - failed}/{len(reports)} checks passed")
    return 0 if failed == 0 else 1


def cmd_epsilon(args) -> int:
    obj = make_objective(args.objective)
    radii = sorted(parse_list(args.radii))
    rows = []
    for b in radii:
        conv = optimal_convex_decomposition(obj, b)
        rows.append((b, epsilon_on_ball(obj, b), conv.epsilon))
    _emit(rows, EPSILON_COLUMNS, f"objective={args.objective}", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="localsgd", description="Local SGD simulation and lemma verification."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one configuration and write a trajectory CSV")
    p.add_argument("--config", required=True, help="experiment config (INI)")
    p.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one parameter and write a summary CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=("H", "K", "M", "sigma", "rho"))
    p.add_argument("--values", required=True, help="comma separated values")
    p.add_argument("--fix-T", dest="fix_T", action="store_true",
                   help="keep T = K*H fixed by adjusting the other of H and K")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run numerical lemma checks")
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--replicates", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("epsilon", help="epsilon of the best quadratic split on balls around x*")
    p.add_argument("--objective", required=True, choices=sorted(ANALYTIC_KINDS))
    p.add_argument("--radii", required=True, help="comma separated radii")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_epsilon)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (LocalSGDError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
