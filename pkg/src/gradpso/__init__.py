"""Particle swarm optimisation hybridised with gradient-based local search."""
from .core import BudgetExhausted, ConfigError, EvalBudget, NonFiniteError, Objective, RngStream
from .gradsearch import LineSearchParams, local_search
from .harness import ExperimentConfig, run_experiment
from .hybrids import STRATEGIES, HybridSpec, RunResult, minimize, run_strategy
from .objectives import OBJECTIVE_NAMES, make_objective
from .swarm import PsoParams

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "ConfigError",
    "EvalBudget",
    "NonFiniteError",
    "Objective",
    "RngStream",
    "LineSearchParams",
    "local_search",
    "ExperimentConfig",
    "run_experiment",
    "STRATEGIES",
    "HybridSpec",
    "RunResult",
    "minimize",
    "run_strategy",
    "OBJECTIVE_NAMES",
    "make_objective",
    "PsoParams",
]
