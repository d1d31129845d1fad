"""Step-size schedules, iterate weights and the weighted-average accumulator.

Iterations are indexed t = 0..T-1. Each schedule exposes ``gamma(t)``, an
averaging window ``[start, T)``, the weight ``w_t`` of iterate t and the ratio
``w_t / w_{t-1}`` used by :class:`WeightedAverage` so that geometric weights
never have to be formed explicitly.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

_INF = math.inf


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")


def _check_T(T: int) -> None:
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")


def thm1_shift(T: int, mu: float, L: float) -> float:
    return 12.0 * L / mu - T / 2.0


def gamma_thm1(t: int, T: int, mu: float, L: float) -> float:
    """Two-phase schedule: 1/(6L), then 2/(mu (shift + t)) for t > T/2 when T > 2L/mu."""
    if not mu > 0:
        raise DomainError("the strongly convex schedule needs mu > 0")
    _positive("L", L)
    _check_T(T)
    if not 0 <= t < T:
        raise DomainError(f"t must lie in [0, {T}), got {t}")
    if T <= 2.0 * L / mu or t <= T / 2.0:
        return 1.0 / (6.0 * L)
    return 2.0 / (mu * (thm1_shift(T, mu, L) + t))


def gamma_thm2(
    T: int, L: float, r0_norm: float, sigma: float, M: int, H: int, L_R: float
) -> float:
    """Constant step for the convex case; sigma = 0 drops the noise terms."""
    _check_T(T)
    _positive("L", L)
    terms = [1.0 / (6.0 * L)]
    if sigma > 0:
        _positive("r0_norm", r0_norm)
        terms.append(r0_norm * math.sqrt(M) / (sigma * math.sqrt(T)))
        if H > 1 and M > 1 and L_R > 0:
            terms.append((r0_norm**2 / (L_R * T * H)) ** (1.0 / 3.0) / sigma ** (2.0 / 3.0))
    return min(terms)


def thm3_C(mu: float, L_R: float) -> float:
    return mu + L_R


def gamma_thm3(
    T: int,
    mu: float,
    rho: float,
    L: float,
    L_R: float,
    H: int,
    M: int,
    r0_norm: float,
    sigma: float,
) -> float:
    """Constant step for the strongly convex case under strong growth noise.

    rho = 0 removes the two rho terms and sigma = 0 removes the log term.
    """
    if not mu > 0:
        raise DomainError("this schedule needs mu > 0")
    _positive("L", L)
    _check_T(T)
    if rho < 0:
        raise DomainError("rho must be >= 0")
    C = thm3_C(mu, L_R)
    terms = [1.0 / (6.0 * L)]
    if rho > 0:
        terms.append(mu / (3.0 * rho * L**2))
        terms.append(math.sqrt(mu) / math.sqrt(6.0 * C * H * rho * L**2))
    if sigma > 0:
        # log of mu^2 r0^2 T^2 M / sigma^2, formed in log space to avoid overflow
        if r0_norm > 0:
            log_inner = 2 * math.log(mu * r0_norm * T / sigma) + math.log(M)
        else:
            log_inner = -math.inf
        terms.append(max(math.log(2.0), log_inner) / (2.0 * mu * T))
    return min(terms)


class Schedule(ABC):
    """Step sizes plus the weighting of the averaged iterates."""

    name: str = ""

    def __init__(self, T: int):
        _check_T(T)
        self.T = int(T)

    @abstractmethod
    def gamma(self, t: int) -> float: ...

    @property
    def window_start(self) -> int:
        return 0

    def in_window(self, t: int) -> bool:
        return self.window_start <= t < self.T

    def _check_window(self, t: int) -> None:
        if not self.in_window(t):
            raise DomainError(f"t={t} outside averaging window [{self.window_start}, {self.T})")

    def weight(self, t: int) -> float:
        self._check_window(t)
        return 1.0

    def weight_ratio(self, t: int) -> float:
        """w_t / w_{t-1} for t > window_start."""
        return 1.0

    def gammas(self) -> np.ndarray:
        return np.array([self.gamma(t) for t in range(self.T)])

    def params(self) -> dict:
        return {}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in {"T": self.T, **self.params()}.items())
        return f"{type(self).__name__}({args})"


class ConstantSchedule(Schedule):
    """Fixed step with uniform averaging over all iterates."""

    name = "constant"

    def __init__(self, T: int, gamma: float, L: float | None = None):
        super().__init__(T)
        _positive("gamma", gamma)
        if L is not None and gamma > (1.0 + 1e-12) / (6.0 * L):
            raise ConfigurationError(f"gamma={gamma} exceeds 1/(6L)={1 / (6 * L)}", "gamma")
        self._gamma = float(gamma)
        self.L = L

    def gamma(self, t):
        return self._gamma

    def params(self):
        return {"gamma": self._gamma}


class Thm1Schedule(Schedule):
    """Strongly convex, bounded variance.

    For T <= 2L/mu: constant 1/(6L), weights (1 - mu gamma)^(-t-1) over all t.
    Otherwise the two-phase steps with weights shift + t on t >= ceil(T/2).
    """

    name = "thm1"

    def __init__(self, T: int, mu: float, L: float):
        super().__init__(T)
        if not mu > 0:
            raise ConfigurationError("thm1 schedule needs mu > 0", "mu")
        _positive("L", L)
        self.mu, self.L = float(mu), float(L)
        self.short_horizon = T <= 2.0 * L / mu
        self.shift = thm1_shift(T, mu, L)

    def gamma(self, t):
        return gamma_thm1(t, self.T, self.mu, self.L)

    @property
    def window_start(self):
        return 0 if self.short_horizon else math.ceil(self.T / 2)

    def weight(self, t):
        self._check_window(t)
        if self.short_horizon:
            return (1.0 - self.mu / (6.0 * self.L)) ** (-t - 1)
        return self.shift + t

    def weight_ratio(self, t):
        if self.short_horizon:
            return 1.0 / (1.0 - self.mu / (6.0 * self.L))
        return (self.shift + t) / (self.shift + t - 1)

    def params(self):
        return {"mu": self.mu, "L": self.L}


class Thm2Schedule(Schedule):
    """Convex, bounded variance: constant step, uniform averaging."""

    name = "thm2"

    def __init__(self, T, L, r0_norm, sigma, M, H, L_R):
        super().__init__(T)
        self.L, self.r0_norm, self.sigma = float(L), float(r0_norm), float(sigma)
        self.M, self.H, self.L_R = int(M), int(H), float(L_R)
        self._gamma = gamma_thm2(T, L, r0_norm, sigma, M, H, L_R)

    def gamma(self, t):
        return self._gamma

    def params(self):
        return {
            "L": self.L,
            "r0_norm": self.r0_norm,
            "sigma": self.sigma,
            "M": self.M,
            "H": self.H,
            "L_R": self.L_R,
        }


class Thm3Schedule(Schedule):
    """Strongly convex under strong growth: constant step, weights (1 - gamma mu/2)^(-t-1)."""

    name = "thm3"

    def __init__(self, T, mu, rho, L, L_R, H, M, r0_norm, sigma):
        super().__init__(T)
        if not mu > 0:
            raise ConfigurationError("thm3 schedule needs mu > 0", "mu")
        self.mu, self.rho, self.L, self.L_R = float(mu), float(rho), float(L), float(L_R)
        self.H, self.M = int(H), int(M)
        self.r0_norm, self.sigma = float(r0_norm), float(sigma)
        self._gamma = gamma_thm3(T, mu, rho, L, L_R, H, M, r0_norm, sigma)
        self.C = thm3_C(mu, L_R)

    def gamma(self, t):
        return self._gamma

    def weight(self, t):
        self._check_window(t)
        return (1.0 - self._gamma * self.mu / 2.0) ** (-(t + 1))

    def weight_ratio(self, t):
        return 1.0 / (1.0 - self._gamma * self.mu / 2.0)

    def params(self):
        return {
            "mu": self.mu,
            "rho": self.rho,
            "L": self.L,
            "L_R": self.L_R,
            "H": self.H,
            "M": self.M,
            "r0_norm": self.r0_norm,
            "sigma": self.sigma,
        }


class InverseTimeSchedule(Schedule):
    """gamma_t = 2 / (mu (shift + t + 1)), the decaying steps of the consensus bound (b)."""

    name = "inverse_time"

    def __init__(self, T: int, mu: float, shift: float):
        super().__init__(T)
        if not mu > 0 or shift < 0:
            raise ConfigurationError("need mu > 0 and shift >= 0", "shift")
        self.mu, self.shift = float(mu), float(shift)

    def gamma(self, t):
        return 2.0 / (self.mu * (self.shift + t + 1))

    def params(self):
        return {"mu": self.mu, "shift": self.shift}


# Public name for "any schedule"
ScheduleSpec = Schedule

SCHEDULE_KINDS = ("constant", "thm1", "thm2", "thm3")


def weights(spec: Schedule, t: int) -> float:
    return spec.weight(t)


def window_weight_sum(spec: Schedule) -> float:
    return math.fsum(spec.weight(t) for t in range(spec.window_start, spec.T))


@dataclass
class WeightedAverage:
    """Running weighted mean sum_t w_t x_t / sum_t w_t.

    ``norm_sum`` holds W_t / w_t (running weight sum over the newest weight),
    so each update only needs the ratio w_t / w_{t-1}.
    """

    mean: np.ndarray | None = None
    norm_sum: float = 0.0
    count: int = 0
    last_weight: float | None = None

    def add(self, x, weight: float | None = None, ratio: float | None = None):
        x = np.asarray(x, dtype=float)
        if self.count == 0:
            if weight is not None and not weight > 0:
                raise DomainError("weights must be positive")
            self.mean = x.copy()
            self.norm_sum = 1.0
        else:
            if ratio is None:
                if weight is None or self.last_weight is None:
                    raise DomainError("need either a weight or a weight ratio")
                ratio = weight / self.last_weight
            if not ratio > 0:
                raise DomainError("weights must be positive")
            self.norm_sum = 1.0 + self.norm_sum / ratio
            self.mean = self.mean + (x - self.mean) / self.norm_sum
        if weight is not None:
            self.last_weight = float(weight)
        elif self.last_weight is not None and ratio is not None:
            self.last_weight *= ratio
        self.count += 1
        return self


def weighted_average_accumulate(state: WeightedAverage, x, w: float) -> WeightedAverage:
    return state.add(x, weight=w)
