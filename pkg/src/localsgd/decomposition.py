"""Splitting an objective into a quadratic part Q and a residual R = F - Q."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedOperationError
from .objectives import (
    Analytic1D,
    Composite,
    Objective,
    Quadratic,
    Separable,
    second_derivative_range,
)


@dataclass(frozen=True)
class Decomposition:
    """F = Q + R with Q(x) = q_offset + 1/2 (x - q_center)^T q_matrix (x - q_center).

    ``radius`` is None when the residual constants hold on all of R^d, else the
    radius of the ball around x* on which they are certified.
    """

    objective: Objective = field(repr=False)
    q_matrix: np.ndarray
    q_center: np.ndarray
    q_offset: float
    mu_Q: float
    L_Q: float
    mu_R: float
    L_R: float
    convex_residual: bool
    radius: float | None = None
    label: str = ""

    @property
    def L(self) -> float:
        return self.objective.L

    @property
    def epsilon(self) -> float:
        return self.L_R / self.objective.L

    @property
    def mu(self) -> float:
        return self.mu_Q + self.mu_R

    def q_value(self, x) -> np.ndarray:
        dx = np.asarray(x, dtype=float) - self.q_center
        return self.q_offset + 0.5 * np.einsum("...i,...i->...", dx @ self.q_matrix, dx)

    def q_grad(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.q_center) @ self.q_matrix

    def r_value(self, x) -> np.ndarray:
        return self.objective.value(x) - self.q_value(x)

    def r_grad(self, x) -> np.ndarray:
        return self.objective.grad(x) - self.q_grad(x)


def _eig_range(H: np.ndarray) -> tuple[float, float]:
    eig = np.linalg.eigvalsh(H)
    return float(eig[0]), float(eig[-1])


def _build(obj, H, center, offset, r_lo, r_hi, radius, label) -> Decomposition:
    """Assemble a decomposition from the residual's curvature range [r_lo, r_hi]."""
    H = np.atleast_2d(np.asarray(H, dtype=float))
    mu_Q, L_Q = _eig_range(H)
    mu_Q = max(mu_Q, 0.0)
    L_R = max(abs(r_lo), abs(r_hi))
    return Decomposition(
        objective=obj,
        q_matrix=H,
        q_center=np.asarray(center, dtype=float).reshape(obj.dim),
        q_offset=float(offset),
        mu_Q=mu_Q,
        L_Q=L_Q,
        mu_R=float(r_lo),
        L_R=float(L_R),
        convex_residual=bool(r_lo >= 0),
        radius=radius,
        label=label,
    )


def _residual_curvature_diag(obj, q_diag, radius):
    """Per-coordinate residual curvature bounds for separable-type objectives."""
    if isinstance(obj, Analytic1D):
        if radius is None:
            lo, hi = obj.mu, obj.L
        else:
            lo, hi = second_derivative_range(obj, obj.x_star, radius)
        return lo - q_diag, hi - q_diag
    if isinstance(obj, Separable):
        lo = obj.scales * obj.base.mu - q_diag
        hi = obj.scales * obj.base.L - q_diag
        return lo, hi
    raise UnsupportedOperationError(f"no residual bounds for {obj.kind}")


def taylor_decomposition(obj: Objective, radius: float | None = None) -> Decomposition:
    """Second-order Taylor expansion of F at x* as the quadratic part.

    The residual then has zero gradient and zero Hessian at x*. Its constants
    are global unless ``radius`` restricts them to a ball (1-D objectives only).
    """
    if not obj.twice_differentiable:
        raise UnsupportedOperationError(f"{obj.kind} is not twice differentiable at x*")
    x_star = obj.x_star
    H = obj.hessian(x_star)
    if isinstance(obj, Quadratic):
        return _build(obj, H, x_star, obj.f_star, 0.0, 0.0, None, "taylor")
    if radius is not None and not isinstance(obj, Analytic1D):
        raise UnsupportedOperationError("ball-restricted constants need a 1-D objective")
    if isinstance(obj, Composite):
        sep = obj.residual
        q_sep = sep.scales * sep.base.d2f(x_star - sep.shifts)
        lo, hi = _residual_curvature_diag(sep, q_sep, None)
    else:
        lo, hi = _residual_curvature_diag(obj, np.diag(H), radius)
    return _build(
        obj, H, x_star, obj.f_star, float(np.min(lo)), float(np.max(hi)), radius, "taylor"
    )


def natural_decomposition(obj: Composite) -> Decomposition:
    """Q = the quadratic term, R = the convex separable term of a Composite."""
    if not isinstance(obj, Composite):
        raise UnsupportedOperationError("natural decomposition needs a composite objective")
    quad = obj.quadratic
    center, *_ = np.linalg.lstsq(quad.A, quad.b, rcond=None)
    offset = quad.c - 0.5 * float(center @ quad.A @ center)
    return _build(
        obj, quad.A, center, offset, obj.residual.mu, obj.residual.L, None, "natural"
    )


def _check_ball(obj: Objective, radius: float) -> None:
    if radius <= 0:
        raise DomainError(f"radius must be positive, got {radius}")
    if not isinstance(obj, (Quadratic, Analytic1D)):
        raise UnsupportedOperationError(
            f"ball epsilon needs a 1-D or quadratic objective, got {obj.kind}"
        )


def epsilon_on_ball(obj: Objective, radius: float) -> float:
    """Epsilon of the best centered quadratic split on the ball around x*.

    Q takes the mid-range curvature, so the residual curvature spans
    +-(M - m)/2 and may be non-convex: eps = (M - m) / (2 L).
    """
    _check_ball(obj, radius)
    if isinstance(obj, Quadratic):
        return 0.0
    m, M = second_derivative_range(obj, obj.x_star, radius)
    return (M - m) / (2.0 * obj.L)


def optimal_convex_decomposition(obj: Objective, radius: float) -> Decomposition:
    """Centered split with convex residual on the ball minimizing L_R.

    Q gets the smallest curvature m on the ball, leaving residual curvature in
    [0, M - m], so eps = (M - m) / L.
    """
    _check_ball(obj, radius)
    if isinstance(obj, Quadratic):
        return _build(obj, obj.A, obj.x_star, obj.f_star, 0.0, 0.0, radius, "convex")
    m, M = second_derivative_range(obj, obj.x_star, radius)
    return _build(obj, [[m]], obj.x_star, obj.f_star, 0.0, M - m, radius, "convex")


def residual_grad(dec: Decomposition, obj: Objective, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dec.q_center.shape[0] or obj.dim != dec.q_center.shape[0]:
        raise ConfigurationError("dimension mismatch", "x")
    return obj.grad(x) - (x - dec.q_center) @ dec.q_matrix
