"""Throughput-optimal listen-before-talk for load based equipment."""

from .channel import ChannelModel, Empirical, GammaFading, PointMass
from .estimator import OptimalStoppingLBT
from .params import LbtParams, ValidationReport, validate, zeta
from .policy import StoppingPolicy
from .sim import SimConfig, SimReport, run, run_period, sweep_thresholds
from .solver import SolverResult, optimal_policy, regulation_optimum, solve_bisection, solve_fixed_point

__all__ = [
    "ChannelModel",
    "Empirical",
    "GammaFading",
    "LbtParams",
    "OptimalStoppingLBT",
    "PointMass",
    "SimConfig",
    "SimReport",
    "SolverResult",
    "StoppingPolicy",
    "ValidationReport",
    "optimal_policy",
    "regulation_optimum",
    "run",
    "run_period",
    "solve_bisection",
    "solve_fixed_point",
    "sweep_thresholds",
    "validate",
    "zeta",
]

__version__ = "0.1.0"
