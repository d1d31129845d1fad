"""Local SGD on near-quadratic objectives: simulation, schedules and lemma checks."""

__version__ = "0.1.0"

from .decomposition import (
    Decomposition,
    epsilon_on_ball,
    natural_decomposition,
    optimal_convex_decomposition,
    taylor_decomposition,
)
from .engine import ReplicatedStats, RunConfig, Trajectory, run, run_replicated, simulate
from .errors import (
    ConfigurationError,
    DomainError,
    LocalSGDError,
    NoMinimizerError,
    PreconditionError,
    UnsupportedOperationError,
)
from .objectives import (
    Composite,
    LogCosh,
    LogLossL2,
    Objective,
    Piecewise,
    Quadratic,
    Separable,
    make_objective,
)
from .oracle import NoiseModel, RngStream, sample_gradient
from .schedules import (
    ConstantSchedule,
    InverseTimeSchedule,
    Thm1Schedule,
    Thm2Schedule,
    Thm3Schedule,
    WeightedAverage,
    gamma_thm1,
    gamma_thm2,
    gamma_thm3,
)
from .verifier import LemmaReport, run_suite

__all__ = [
    "Composite",
    "ConfigurationError",
    "ConstantSchedule",
    "Decomposition",
    "DomainError",
    "InverseTimeSchedule",
    "LemmaReport",
    "LocalSGDError",
    "LogCosh",
    "LogLossL2",
    "NoMinimizerError",
    "NoiseModel",
    "Objective",
    "Piecewise",
    "PreconditionError",
    "Quadratic",
    "ReplicatedStats",
    "RngStream",
    "RunConfig",
    "Separable",
    "Thm1Schedule",
    "Thm2Schedule",
    "Thm3Schedule",
    "Trajectory",
    "UnsupportedOperationError",
    "WeightedAverage",
    "epsilon_on_ball",
    "gamma_thm1",
    "gamma_thm2",
    "gamma_thm3",
    "make_objective",
    "natural_decomposition",
    "optimal_convex_decomposition",
    "run",
    "run_replicated",
    "sample_gradient",
    "simulate",
    "taylor_decomposition",
]
