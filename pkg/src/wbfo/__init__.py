"""Spline-parameterized sampling trajectory optimization (WBFO, AVWBFO, MPPI)."""

from .errors import (
    ConfigurationError,
    ContractError,
    DomainError,
    EvaluationError,
    IntegrityError,
    NumericalError,
    SimulationFault,
)
from .noise import NoiseSchedule, gaussian_noise
from .optim import OptimizerConfig, ScoreEstimate, optimize, optimizer_step
from .planner import PlannerConfig, plan_episode
from .spline import build_basis, dense_to_nodes, nodes_to_dense

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "ContractError", "DomainError", "EvaluationError",
    "IntegrityError", "NumericalError", "SimulationFault",
    "NoiseSchedule", "gaussian_noise",
    "OptimizerConfig", "ScoreEstimate", "optimize", "optimizer_step",
    "PlannerConfig", "plan_episode",
    "build_basis", "dense_to_nodes", "nodes_to_dense",
]
