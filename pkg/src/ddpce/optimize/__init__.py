"""Stochastic optimisers and heat-sink design studies."""

from .de import minimize_de
from .heatsink import (
    AggregatedOptimum,
    aggregate_optima,
    bi_objective_problem,
    optimize_over_ensemble,
    pareto_over_ensemble,
    single_objective_problem,
)
from .nsga2 import minimize_nsga2
from .pareto import ParetoFront, hypervolume_2d, pareto_filter
from .problem import Evaluator, FeasibilityError, OptProblem, OptResult, WrongAlgorithmError
from .pso import minimize_pso

__all__ = [
    "AggregatedOptimum",
    "Evaluator",
    "FeasibilityError",
    "OptProblem",
    "OptResult",
    "ParetoFront",
    "WrongAlgorithmError",
    "aggregate_optima",
    "bi_objective_problem",
    "hypervolume_2d",
    "minimize_de",
    "minimize_nsga2",
    "minimize_pso",
    "optimize_over_ensemble",
    "pareto_filter",
    "pareto_over_ensemble",
    "single_objective_problem",
]
