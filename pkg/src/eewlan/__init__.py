"""Energy-efficient, fairness-aware power control and scheduling for dense WLANs."""

from .channel import Deployment, GainMatrices, RadioConfig, build_gains, noise_power_mw, pathloss_db, sinr
from .errors import DomainError, WarmupError
from .rates import McsTable, default_mcs_table
from .power import FeasibilityReport, LinkSystem, check_constraints, constraint_g, min_powers
from .solver import Solution, SolverConfig, brute_force, solve
from .utility import mean_throughput, objective_u_hat, u_alpha
from .scheduler import ScheduleState, TimeSeries, run, step, warmup
from .baselines import DcfConfig, run_legacy, run_power_scheduling, run_scheduling_only
from .harness import ExperimentConfig, MetricsRow, compute_metrics, sweep

__all__ = [
    "DcfConfig",
    "Deployment",
    "ExperimentConfig",
    "MetricsRow",
    "ScheduleState",
    "TimeSeries",
    "compute_metrics",
    "run",
    "run_legacy",
    "run_power_scheduling",
    "run_scheduling_only",
    "step",
    "sweep",
    "warmup",
    "DomainError",
    "FeasibilityReport",
    "GainMatrices",
    "LinkSystem",
    "McsTable",
    "RadioConfig",
    "Solution",
    "SolverConfig",
    "WarmupError",
    "brute_force",
    "build_gains",
    "check_constraints",
    "constraint_g",
    "default_mcs_table",
    "mean_throughput",
    "min_powers",
    "noise_power_mw",
    "objective_u_hat",
    "pathloss_db",
    "sinr",
    "solve",
    "u_alpha",
]
