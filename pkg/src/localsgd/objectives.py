"""Objective catalog with exact derivatives and certified curvature constants.

Every objective evaluates on batches: ``x`` may have any leading shape as long
as its last axis equals the dimension, so the engine can evaluate all
replicates and workers in one call.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence

import numpy as np
from scipy import optimize, special

from .errors import ConfigurationError, NoMinimizerError, UnsupportedOperationError

# grid size for curvature scans on a ball
CURVATURE_GRID = 4096


class Objective(ABC):
    """A smooth convex function with known minimizer and constants (mu, L)."""

    kind: str = "objective"
    twice_differentiable: bool = True

    def __init__(self, dim: int, mu: float, L: float):
        if dim < 1:
            raise ConfigurationError("dimension must be >= 1", "d")
        if L <= 0:
            raise ConfigurationError("smoothness constant must be positive", "L")
        if not 0 <= mu <= L:
            raise ConfigurationError(f"need 0 <= mu <= L, got mu={mu}, L={L}", "mu")
        self.dim = int(dim)
        self.mu = float(mu)
        self.L = float(L)
        self._x_star: np.ndarray | None = None
        self._f_star: float | None = None

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ConfigurationError(
                f"expected trailing dimension {self.dim}, got shape {x.shape}", "x"
            )
        return x

    @abstractmethod
    def value(self, x) -> np.ndarray | float: ...

    @abstractmethod
    def grad(self, x) -> np.ndarray: ...

    @abstractmethod
    def hessian(self, x) -> np.ndarray:
        """Hessian at a single point, shape (d, d)."""

    @abstractmethod
    def _solve_minimizer(self) -> np.ndarray: ...

    @property
    def x_star(self) -> np.ndarray:
        if self._x_star is None:
            self._x_star = np.asarray(self._solve_minimizer(), dtype=float)
            self._x_star.setflags(write=False)
        return self._x_star

    @property
    def f_star(self) -> float:
        if self._f_star is None:
            self._f_star = float(self.value(self.x_star))
        return self._f_star

    def describe(self) -> dict:
        return {"kind": self.kind, "d": self.dim, "mu": self.mu, "L": self.L}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(d={self.dim}, mu={self.mu:g}, L={self.L:g})"


class Quadratic(Objective):
    """F(x) = 1/2 x^T A x - b^T x + c with A symmetric positive semidefinite.

    ``mu`` and ``L`` are the extreme eigenvalues of ``A``.
    """

    kind = "quadratic"

    def __init__(self, A, b=None, c: float = 0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[0] != A.shape[1]:
            raise ConfigurationError(f"matrix must be square, got {A.shape}", "matrix")
        if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise ConfigurationError("matrix must be symmetric", "matrix")
        A = 0.5 * (A + A.T)
        d = A.shape[0]
        b = np.zeros(d) if b is None else np.asarray(b, dtype=float).reshape(-1)
        if b.shape != (d,):
            raise ConfigurationError(f"b must have length {d}", "b")
        eig = np.linalg.eigvalsh(A)
        scale = max(1.0, abs(eig[-1]))
        if eig[0] < -1e-12 * scale:
            raise ConfigurationError("matrix must be positive semidefinite", "matrix")
        mu = max(float(eig[0]), 0.0)
        super().__init__(d, mu, float(eig[-1]))
        self.A = A
        self.b = b
        self.c = float(c)
        for arr in (self.A, self.b):
            arr.setflags(write=False)

    @classmethod
    def from_minimizer(cls, H, x_star, f_star: float = 0.0) -> Quadratic:
        """Build f_star + 1/2 (x - x_star)^T H (x - x_star)."""
        H = np.atleast_2d(np.asarray(H, dtype=float))
        x_star = np.asarray(x_star, dtype=float).reshape(-1)
        b = H @ x_star
        return cls(H, b, f_star + 0.5 * float(x_star @ b))

    @classmethod
    def from_spectrum(
        cls, d: int, mu: float, L: float, seed: int = 0, x_star=None
    ) -> Quadratic:
        """Random rotation of diag(linspace(mu, L, d)); both extremes are attained."""
        if d < 1:
            raise ConfigurationError("dimension must be >= 1", "d")
        if not 0 <= mu <= L or L <= 0:
            raise ConfigurationError(f"need 0 <= mu <= L, L > 0 (got {mu}, {L})", "mu")
        rng = np.random.default_rng(seed)
        q, r = np.linalg.qr(rng.standard_normal((d, d)))
        q = q * np.sign(np.diag(r))
        eig = np.linspace(mu, L, d) if d > 1 else np.array([L])
        if d == 1 and mu != L:
            raise ConfigurationError("a 1-D quadratic needs mu == L", "mu")
        H = (q * eig) @ q.T
        H = 0.5 * (H + H.T)
        x_star = np.zeros(d) if x_star is None else x_star
        obj = cls.from_minimizer(H, x_star)
        # eigvalsh may round the extremes; keep the requested constants
        obj.mu, obj.L = float(mu), float(L)
        return obj

    def value(self, x):
        x = self._check(x)
        return 0.5 * np.einsum("...i,...i->...", x @ self.A, x) - x @ self.b + self.c

    def grad(self, x):
        x = self._check(x)
        return x @ self.A - self.b

    def hessian(self, x=None):
        return np.array(self.A)

    def _solve_minimizer(self):
        sol, *_ = np.linalg.lstsq(self.A, self.b, rcond=None)
        resid = np.linalg.norm(self.A @ sol - self.b)
        if resid > 1e-9 * max(1.0, np.linalg.norm(self.b)):
            raise NoMinimizerError("b is not in the range of A; F is unbounded below")
        if self.mu == 0:
            # lstsq already returns the least-norm minimizer
            return sol
        return np.linalg.solve(self.A, self.b)

    def describe(self) -> dict:
        return {**super().describe(), "matrix": self.A.tolist(), "b": self.b.tolist()}


class Analytic1D(Objective):
    """Scalar function of one variable given by closed-form derivatives."""

    # points where the second derivative has a local extremum
    curvature_critical_points: tuple[float, ...] = ()
    # points where the second derivative jumps
    kinks: tuple[float, ...] = ()

    def __init__(self, mu: float, L: float):
        super().__init__(1, mu, L)

    @abstractmethod
    def f(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def df(self, x: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def d2f(self, x: np.ndarray) -> np.ndarray: ...

    def d3f(self, x: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError(f"{self.kind} has no third derivative")

    def kink_curvatures(self, point: float) -> tuple[float, float]:
        """Left and right second derivatives at a kink."""
        raise UnsupportedOperationError(f"{self.kind} has no kinks")

    def value(self, x):
        x = self._check(x)
        return self.f(x[..., 0])

    def grad(self, x):
        x = self._check(x)
        return self.df(x)

    def hessian(self, x):
        x = self._check(x).reshape(1)
        return np.atleast_2d(self.d2f(x))


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - np.log(2.0)


class LogCosh(Analytic1D):
    """ln cosh(x): 1-smooth, convex, not strongly convex, minimum at 0."""

    kind = "logcosh"
    curvature_critical_points = (0.0,)

    def __init__(self):
        super().__init__(0.0, 1.0)

    def f(self, x):
        return _logcosh(x)

    def df(self, x):
        return np.tanh(x)

    def d2f(self, x):
        return 1.0 / np.cosh(x) ** 2

    def d3f(self, x):
        return -2.0 * np.tanh(x) / np.cosh(x) ** 2

    def _solve_minimizer(self):
        return np.zeros(1)


class LogLossL2(Analytic1D):
    """Logistic loss with ridge term: -ln(sigmoid(x)) + 0.03 x^2.

    The curvature sigmoid'(x) + 0.06 lies in (0.06, 0.31]. Plots of this
    function sometimes use x^2/33 for the ridge term; 0.03 x^2 is used here.
    """

    kind = "logloss_l2"
    ridge = 0.03
    curvature_critical_points = (0.0,)

    def __init__(self):
        super().__init__(2 * self.ridge, 0.25 + 2 * self.ridge)

    def f(self, x):
        return -special.log_expit(x) + self.ridge * x**2

    def df(self, x):
        return special.expit(x) - 1.0 + 2 * self.ridge * x

    def d2f(self, x):
        s = special.expit(x)
        return s * (1.0 - s) + 2 * self.ridge

    def d3f(self, x):
        s = special.expit(x)
        return s * (1.0 - s) * (1.0 - 2.0 * s)

    def _solve_minimizer(self):
        root = optimize.bisect(
            lambda t: float(self.df(np.float64(t))), 0.0, 4.0, xtol=1e-15, maxiter=200
        )
        return np.array([root])


class Piecewise(Analytic1D):
    """x^2/5 for x < 0 and x^2 for x >= 0; convex with a curvature jump at 0."""

    kind = "piecewise"
    twice_differentiable = False
    kinks = (0.0,)

    def __init__(self):
        super().__init__(0.4, 2.0)

    def f(self, x):
        return np.where(x < 0, x**2 / 5.0, x**2)

    def df(self, x):
        return np.where(x < 0, 2.0 * x / 5.0, 2.0 * x)

    def d2f(self, x):
        return np.where(np.asarray(x) < 0, 0.4, 2.0)

    def kink_curvatures(self, point):
        return 0.4, 2.0

    def _solve_minimizer(self):
        return np.zeros(1)


ANALYTIC_KINDS: dict[str, type[Analytic1D]] = {
    LogCosh.kind: LogCosh,
    LogLossL2.kind: LogLossL2,
    Piecewise.kind: Piecewise,
}


class Separable(Objective):
    """Sum over coordinates of ``scales[i] * base(x_i - shifts[i])``.

    Constants stay exact: mu and L are the extreme coordinate constants.
    """

    kind = "separable"

    def __init__(self, base: Analytic1D, d: int, scales=None, shifts=None):
        scales = np.ones(d) if scales is None else np.asarray(scales, dtype=float)
        shifts = np.zeros(d) if shifts is None else np.asarray(shifts, dtype=float)
        if scales.shape != (d,) or shifts.shape != (d,):
            raise ConfigurationError(f"scales and shifts need length {d}", "scales")
        if np.any(scales <= 0):
            raise ConfigurationError("scales must be positive", "scales")
        super().__init__(d, float(scales.min() * base.mu), float(scales.max() * base.L))
        self.base = base
        self.scales = scales
        self.shifts = shifts
        self.twice_differentiable = base.twice_differentiable

    def value(self, x):
        x = self._check(x)
        return np.sum(self.scales * self.base.f(x - self.shifts), axis=-1)

    def grad(self, x):
        x = self._check(x)
        return self.scales * self.base.df(x - self.shifts)

    def hessian(self, x):
        x = self._check(x).reshape(self.dim)
        return np.diag(self.scales * self.base.d2f(x - self.shifts))

    def _solve_minimizer(self):
        return self.shifts + self.base.x_star[0]

    def describe(self) -> dict:
        return {
            **super().describe(),
            "base": self.base.kind,
            "scales": self.scales.tolist(),
            "shifts": self.shifts.tolist(),
        }


class Composite(Objective):
    """Quadratic plus a convex separable term.

    mu and L are certified as the sums of the parts' constants (L is an upper
    bound, not necessarily tight).
    """

    kind = "composite"

    def __init__(self, quadratic: Quadratic, residual: Separable):
        if quadratic.dim != residual.dim:
            raise ConfigurationError("quadratic and residual dimensions differ", "d")
        super().__init__(
            quadratic.dim, quadratic.mu + residual.mu, quadratic.L + residual.L
        )
        self.quadratic = quadratic
        self.residual = residual
        self.twice_differentiable = residual.twice_differentiable

    def value(self, x):
        return self.quadratic.value(x) + self.residual.value(x)

    def grad(self, x):
        return self.quadratic.grad(x) + self.residual.grad(x)

    def hessian(self, x):
        return self.quadratic.hessian() + self.residual.hessian(x)

    def _solve_minimizer(self):
        if self.mu <= 0:
            raise NoMinimizerError("composite minimizer requires mu > 0")
        x = np.linalg.solve(self.quadratic.A, self.quadratic.b)
        f = float(self.value(x))
        for _ in range(100):
            g = self.grad(x)
            if np.linalg.norm(g) <= 1e-14 * max(1.0, self.L * (1 + np.linalg.norm(x))):
                break
            step = np.linalg.solve(self.hessian(x), g)
            t = 1.0
            while t > 1e-10:
                x_new = x - t * step
                f_new = float(self.value(x_new))
                if f_new <= f:
                    break
                t *= 0.5
            if np.array_equal(x_new, x):
                break
            x, f = x_new, f_new
        return x

    def describe(self) -> dict:
        return {
            **super().describe(),
            "quadratic": self.quadratic.describe(),
            "residual": self.residual.describe(),
        }


def value(obj: Objective, x) -> np.ndarray | float:
    return obj.value(x)


def grad(obj: Objective, x) -> np.ndarray:
    return obj.grad(x)


def minimizer(obj: Objective) -> np.ndarray:
    return np.array(obj.x_star)


def _ball_interval(obj: Analytic1D, center, radius: float) -> tuple[float, float]:
    c = float(np.asarray(center, dtype=float).reshape(-1)[0])
    return c - radius, c + radius


def _scan_points(obj: Analytic1D, lo: float, hi: float, extra=()) -> np.ndarray:
    pts = [np.linspace(lo, hi, CURVATURE_GRID)]
    inside = [p for p in extra if lo <= p <= hi]
    if inside:
        pts.append(np.asarray(inside, dtype=float))
    return np.concatenate(pts)


def second_derivative_range(obj: Objective, center, radius: float) -> tuple[float, float]:
    """Min and max curvature over the closed ball of ``radius`` around ``center``.

    Quadratics return their eigenvalue range. For 1-D functions the range is
    scanned on a uniform grid with the endpoints, the known curvature extrema
    and, at a kink, both one-sided curvatures.
    """
    if radius < 0:
        raise ConfigurationError("radius must be >= 0", "radius")
    if isinstance(obj, Quadratic):
        eig = np.linalg.eigvalsh(obj.A)
        return float(eig[0]), float(eig[-1])
    if not isinstance(obj, Analytic1D):
        raise UnsupportedOperationError(
            f"second_derivative_range needs a 1-D or quadratic objective, got {obj.kind}"
        )
    lo, hi = _ball_interval(obj, center, radius)
    pts = _scan_points(obj, lo, hi, obj.curvature_critical_points)
    curv = list(np.asarray(obj.d2f(pts), dtype=float))
    for k in obj.kinks:
        if lo <= k <= hi:
            curv.extend(obj.kink_curvatures(k))
    return float(min(curv)), float(max(curv))


def max_abs_third_derivative(obj: Analytic1D, center, radius: float) -> float:
    """Grid estimate of max |F'''| on the ball (Hessian-Lipschitz constant)."""
    if not isinstance(obj, Analytic1D) or not obj.twice_differentiable:
        raise UnsupportedOperationError(f"{obj.kind} has no Lipschitz Hessian")
    lo, hi = _ball_interval(obj, center, radius)
    pts = _scan_points(obj, lo, hi)
    vals = np.abs(obj.d3f(pts))
    i = int(np.argmax(vals))
    # polish the grid maximum between its neighbours
    a, b = pts[max(i - 1, 0)], pts[min(i + 1, pts.size - 1)]
    if b > a:
        res = optimize.minimize_scalar(
            lambda x: -abs(float(obj.d3f(np.array(x)))), bounds=(a, b), method="bounded",
            options={"xatol": 1e-12},
        )
        return float(max(vals[i], -res.fun))
    return float(vals[i])


def make_objective(kind: str, **params) -> Objective:
    """Construct a catalog objective by name (used by config loading and the CLI)."""
    kind = kind.lower()
    if kind in ANALYTIC_KINDS:
        if params:
            raise ConfigurationError(f"{kind} takes no parameters, got {sorted(params)}")
        return ANALYTIC_KINDS[kind]()
    if kind == "quadratic":
        if "matrix" in params:
            return Quadratic(params["matrix"], params.get("b"), params.get("c", 0.0))
        try:
            d, mu, L = int(params["d"]), float(params["mu"]), float(params["L"])
        except KeyError as exc:
            raise ConfigurationError(
                "quadratic needs either matrix or (d, mu, L)", str(exc.args[0])
            ) from None
        return Quadratic.from_spectrum(d, mu, L, int(params.get("seed", 0)), params.get("x_star"))
    if kind == "separable":
        base = params.get("base")
        if base not in ANALYTIC_KINDS:
            raise ConfigurationError(f"unknown base function {base!r}", "base")
        d = int(params.get("d", 1))
        return Separable(ANALYTIC_KINDS[base](), d, params.get("scales"), params.get("shifts"))
    raise ConfigurationError(f"unknown objective kind {kind!r}", "kind")


def as_vector(values: Sequence[float] | float, d: int, field: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.shape != (d,):
        raise ConfigurationError(f"expected {d} values, got {arr.size}", field)
    return arr
