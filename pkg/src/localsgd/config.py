"""Experiment configuration files.

Configs are INI files with the sections ``[objective]``, ``[noise]``,
``[schedule]``, ``[run]`` and an optional ``[decomposition]``::

    [objective]
    kind = quadratic
    d = 5
    mu = 1
    L = 10
    seed = 0

    [noise]
    sigma = 1
    rho = 0

    [schedule]
    kind = constant        ; gamma defaults to 1/(6L)

    [run]
    M = 4
    H = 8
    K = 32
    seed = 1
    replicates = 200

Lists are comma separated, matrices use ``;`` between rows. Unless given,
``x0`` is x* plus the all-ones vector scaled to unit length.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .decomposition import Decomposition, optimal_convex_decomposition, taylor_decomposition
from .engine import RunConfig
from .errors import ConfigurationError, LocalSGDError
from .objectives import Objective, make_objective
from .oracle import NoiseModel
from .schedules import (
    SCHEDULE_KINDS,
    ConstantSchedule,
    Schedule,
    Thm1Schedule,
    Thm2Schedule,
    Thm3Schedule,
)

SECTIONS = ("objective", "noise", "schedule", "run", "decomposition")
SWEEP_PARAMS = ("H", "K", "M", "sigma", "rho")
DECOMPOSITION_KINDS = ("none", "taylor", "convex")

_OBJECTIVE_KEYS = {
    "quadratic": {"d", "mu", "L", "seed", "matrix", "b", "c", "x_star"},
    "separable": {"base", "d", "scales", "shifts"},
}
_SCHEDULE_KEYS = {
    "constant": {"gamma"},
    "thm1": {"mu"},
    "thm2": {"r0_norm", "L_R"},
    "thm3": {"mu", "r0_norm", "L_R"},
}
_RUN_KEYS = {"M", "H", "K", "seed", "replicates", "x0", "parallel"}


class ConfigError(ConfigurationError):
    """A configuration problem pinned to a file location."""

    def __init__(self, message, section=None, key=None, line=None, source=None):
        where = []
        if source:
            where.append(str(source) + (f":{line}" if line else ""))
        elif line:
            where.append(f"line {line}")
        if section:
            where.append(f"[{section}]" + (f" {key}" if key else ""))
        self.section, self.key, self.line = section, key, line
        prefix = " ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.field = key


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Map (section, key) and (section, "") to 1-based line numbers."""
    index, section = {}, None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip().lower()
            index.setdefault((section, ""), n)
        elif section and s and s[0] not in "#;" and ("=" in s or ":" in s):
            key = re.split(r"[=:]", s, maxsplit=1)[0].strip()
            index.setdefault((section, key), n)
    return index


@dataclass
class ExperimentConfig:
    """Parsed, validated experiment description; ``build`` yields a RunConfig."""

    objective: dict
    noise: dict
    schedule: dict
    run: dict
    decomposition: dict = field(default_factory=lambda: {"kind": "none"})
    source: str | None = None

    def build(self) -> RunConfig:
        return _build_run_config(self)

    def with_values(self, **updates) -> ExperimentConfig:
        """Copy with run or noise fields replaced (M, H, K, sigma, rho, ...)."""
        run, noise = dict(self.run), dict(self.noise)
        for k, v in updates.items():
            if k in ("sigma", "rho", "construction"):
                noise[k] = v
            else:
                run[k] = v
        return replace(self, run=run, noise=noise)

    @property
    def seed(self) -> int:
        return int(self.run["seed"])

    def canonical(self) -> str:
        return dump_config(self)

    def config_hash(self) -> str:
        # parallelism changes how, not what, is computed
        run = {k: v for k, v in self.run.items() if k != "parallel"}
        text = dump_config(replace(self, run=run))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


# value parsing


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, np.ndarray):
        if v.ndim == 2:
            return "; ".join(", ".join(repr(float(x)) for x in row) for row in v)
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def parse_list(text: str) -> list[float]:
    return [float(x) for x in re.split(r"[,\s]+", text.strip()) if x]


def _parse_matrix(text: str) -> np.ndarray:
    rows = [parse_list(r) for r in text.split(";") if r.strip()]
    if len({len(r) for r in rows}) != 1:
        raise ValueError("matrix rows have different lengths")
    return np.array(rows)


class _Reader:
    def __init__(self, parser, lines, source):
        self.parser, self.lines, self.source = parser, lines, source

    def error(self, msg, section, key=None):
        line = self.lines.get((section, key or ""))
        return ConfigError(msg, section, key, line, self.source)

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def raw(self, section, key):
        return self.parser.get(section, key)

    def get(self, section, key, conv, default=...):
        if not self.has(section, key):
            if default is ...:
                raise self.error("required key is missing", section, key)
            return default
        text = self.raw(section, key)
        try:
            return conv(text)
        except (ValueError, TypeError) as exc:
            raise self.error(f"cannot parse {text!r}: {exc}", section, key) from None

    def check_keys(self, section, allowed):
        if not self.parser.has_section(section):
            return
        for key in self.parser.options(section):
            if key not in allowed:
                raise self.error(f"unknown key (allowed: {sorted(allowed)})", section, key)


def _as_int(text):
    value = float(text)
    if value != int(value):
        raise ValueError("expected an integer")
    return int(value)


def _as_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def parse_config(text: str, source: str | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " "), source=source) from None
    lines = _line_index(text)
    rd = _Reader(parser, lines, source)
    for sec in parser.sections():
        if sec not in SECTIONS:
            raise rd.error(f"unknown section (expected one of {SECTIONS})", sec)
    for sec in ("objective", "run"):
        if not parser.has_section(sec):
            raise ConfigError("required section is missing", sec, source=source)

    kind = rd.get("objective", "kind", lambda s: s.strip().lower())
    objective: dict = {"kind": kind}
    allowed = _OBJECTIVE_KEYS.get(kind, set()) | {"kind"}
    rd.check_keys("objective", allowed)
    convs = {
        "d": _as_int, "seed": _as_int, "mu": float, "L": float, "c": float,
        "matrix": _parse_matrix, "b": parse_list, "x_star": parse_list,
        "scales": parse_list, "shifts": parse_list, "base": lambda s: s.strip().lower(),
    }
    for key in sorted(allowed - {"kind"}):
        if rd.has("objective", key):
            objective[key] = rd.get("objective", key, convs[key])

    noise = {"sigma": 0.0, "rho": 0.0, "construction": "gaussian"}
    rd.check_keys("noise", set(noise))
    for key, conv in (("sigma", float), ("rho", float), ("construction", str.strip)):
        noise[key] = rd.get("noise", key, conv, noise[key])

    sched_kind = rd.get("schedule", "kind", lambda s: s.strip().lower(), "constant")
    if sched_kind not in SCHEDULE_KINDS:
        raise rd.error(f"unknown schedule {sched_kind!r} (choose from {SCHEDULE_KINDS})",
                       "schedule", "kind")
    schedule: dict = {"kind": sched_kind}
    rd.check_keys("schedule", _SCHEDULE_KEYS[sched_kind] | {"kind"})
    for key in sorted(_SCHEDULE_KEYS[sched_kind]):
        if rd.has("schedule", key):
            schedule[key] = rd.get("schedule", key, float)

    rd.check_keys("run", _RUN_KEYS)
    run = {
        "M": rd.get("run", "M", _as_int),
        "H": rd.get("run", "H", _as_int),
        "K": rd.get("run", "K", _as_int),
        "seed": rd.get("run", "seed", _as_int, 0),
        "replicates": rd.get("run", "replicates", _as_int, 1),
        "parallel": rd.get("run", "parallel", _as_bool, False),
    }
    if rd.has("run", "x0"):
        run["x0"] = rd.get("run", "x0", parse_list)

    decomposition = {"kind": "none"}
    rd.check_keys("decomposition", {"kind", "radius"})
    dk = rd.get("decomposition", "kind", lambda s: s.strip().lower(), "none")
    if dk not in DECOMPOSITION_KINDS:
        raise rd.error(f"unknown decomposition {dk!r}", "decomposition", "kind")
    decomposition["kind"] = dk
    if rd.has("decomposition", "radius"):
        decomposition["radius"] = rd.get("decomposition", "radius", float)
    if dk == "convex" and "radius" not in decomposition:
        raise rd.error("convex decomposition needs a radius", "decomposition", "kind")

    exp = ExperimentConfig(objective, noise, schedule, run, decomposition, source)
    # validate everything now so errors surface before any computation
    _build_run_config(exp, rd)
    return exp


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config(text, str(path))


def dump_config(exp: ExperimentConfig) -> str:
    """Canonical text form; parsing it gives back an equivalent config."""
    out = []
    blocks = [
        ("objective", exp.objective),
        ("noise", exp.noise),
        ("schedule", exp.schedule),
        ("run", exp.run),
        ("decomposition", exp.decomposition),
    ]
    for name, values in blocks:
        out.append(f"[{name}]")
        keys = ["kind"] if "kind" in values else []
        keys += sorted(k for k in values if k != "kind")
        out.extend(f"{k} = {_fmt(values[k])}" for k in keys)
        out.append("")
    return "\n".join(out)


# building


def _make_objective(exp: ExperimentConfig, rd=None) -> Objective:
    params = {k: v for k, v in exp.objective.items() if k != "kind"}
    for key in ("x_star", "b"):
        if key in params:
            params[key] = np.asarray(params[key], dtype=float)
    try:
        return make_objective(exp.objective["kind"], **params)
    except (LocalSGDError, ValueError) as exc:
        key = getattr(exc, "field", None) or "kind"
        if rd is not None:
            raise rd.error(str(exc), "objective", key) from None
        raise ConfigError(str(exc), "objective", key) from None


def _make_decomposition(exp, obj, rd=None) -> Decomposition | None:
    spec = exp.decomposition
    try:
        if spec["kind"] == "taylor":
            return taylor_decomposition(obj, spec.get("radius"))
        if spec["kind"] == "convex":
            return optimal_convex_decomposition(obj, spec["radius"])
    except (LocalSGDError, ValueError, TypeError) as exc:
        if rd is not None:
            raise rd.error(str(exc), "decomposition", "kind") from None
        raise ConfigError(str(exc), "decomposition", "kind") from None
    return None


def _make_schedule(exp, obj, dec, x0) -> Schedule:
    spec, run, noise = exp.schedule, exp.run, exp.noise
    T = run["K"] * run["H"]
    mu = spec.get("mu", max(obj.mu, dec.mu if dec is not None else 0.0))
    if dec is not None:
        L_R = dec.L_R
    elif obj.kind == "quadratic":
        L_R = 0.0
    else:
        # without a split, the trivial one (Q = 0) has residual smoothness L
        L_R = obj.L
    L_R = spec.get("L_R", L_R)
    r0 = spec.get("r0_norm", float(np.linalg.norm(x0 - obj.x_star)))
    kind = spec["kind"]
    if kind == "constant":
        return ConstantSchedule(T, spec.get("gamma", 1.0 / (6.0 * obj.L)), obj.L)
    if kind == "thm1":
        return Thm1Schedule(T, mu, obj.L)
    if kind == "thm2":
        return Thm2Schedule(T, obj.L, r0, noise["sigma"], run["M"], run["H"], L_R)
    return Thm3Schedule(
        T, mu, noise["rho"], obj.L, L_R, run["H"], run["M"], r0, noise["sigma"]
    )


def default_x0(obj: Objective) -> np.ndarray:
    return obj.x_star + np.ones(obj.dim) / math.sqrt(obj.dim)


def _build_run_config(exp: ExperimentConfig, rd=None) -> RunConfig:
    def fail(msg, section, key):
        if rd is not None:
            return rd.error(msg, section, key)
        return ConfigError(msg, section, key, source=exp.source)

    obj = _make_objective(exp, rd)
    dec = _make_decomposition(exp, obj, rd)
    run = exp.run
    x0 = np.asarray(run["x0"], dtype=float) if "x0" in run else default_x0(obj)
    if x0.shape != (obj.dim,):
        raise fail(f"x0 has length {x0.size}, objective dimension is {obj.dim}", "run", "x0")
    try:
        noise = NoiseModel(exp.noise["sigma"], exp.noise["rho"], exp.noise["construction"])
    except ConfigurationError as exc:
        raise fail(str(exc), "noise", exc.field) from None
    for key in ("M", "H", "K", "replicates"):
        if run[key] < 1:
            raise fail("must be >= 1", "run", key)
    try:
        sched = _make_schedule(exp, obj, dec, x0)
    except LocalSGDError as exc:
        raise fail(str(exc), "schedule", "kind") from None
    try:
        return RunConfig(
            objective=obj,
            schedule=sched,
            noise=noise,
            M=run["M"],
            H=run["H"],
            K=run["K"],
            x0=x0,
            seed=run["seed"],
            replicates=run["replicates"],
            decomposition=dec,
            parallel=run["parallel"],
        )
    except ConfigurationError as exc:
        section = "schedule" if exc.field == "schedule" else "run"
        raise fail(str(exc), section, exc.field if section == "run" else "kind") from None


@dataclass
class SweepSpec:
    """One base config swept over a single parameter.

    With ``fix_T`` a sweep over H (or K) rescales K (or H) so that T = K*H stays
    at the base value; values that do not divide T are rejected.
    """

    base: ExperimentConfig
    param: str
    values: list[float]
    fix_T: bool = False

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ConfigurationError(f"cannot sweep {self.param!r}; choose from {SWEEP_PARAMS}", "param")
        if not self.values:
            raise ConfigurationError("empty value list", "values")
        if self.fix_T and self.param not in ("H", "K"):
            raise ConfigurationError("--fix-T applies to H or K sweeps only", "fix_T")

    def configs(self):
        T = self.base.run["H"] * self.base.run["K"]
        for v in self.values:
            if self.param in ("sigma", "rho"):
                upd = {self.param: float(v)}
            else:
                iv = int(v)
                if iv != v or iv < 1:
                    raise ConfigurationError(f"{self.param} must be a positive integer, got {v}", "values")
                upd = {self.param: iv}
                if self.fix_T:
                    other = "K" if self.param == "H" else "H"
                    if T % iv:
                        raise ConfigurationError(f"{self.param}={iv} does not divide T={T}", "values")
                    upd[other] = T // iv
            exp = self.base.with_values(**upd)
            yield upd[self.param], exp, exp.build()
