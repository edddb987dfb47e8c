"""Heat-sink design studies driven by surrogate ensembles."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..basis import PceModel
from ..ensemble import EnsembleModel
from ..features import DEFAULT_SPECS, feature_index, round_integer_features
from ..thermal import ThermalConstants, heatsink_volume, junction_temperature
from .de import minimize_de
from .nsga2 import minimize_nsga2
from .pareto import ParetoFront
from .problem import OptProblem, OptResult
from .pso import minimize_pso

DEFAULT_PINS = {"T_a": 45.0, "P": 140.0}
ALGORITHMS = {"pso": minimize_pso, "de": minimize_de}
DEFAULT_BUDGETS = {"pso": 5000, "de": 25000, "nsga2": 20000}


def member_seed(seed: int, member: int) -> int:
    """Seed for the run on ensemble member ``member``; independent of run order."""
    return int(np.random.SeedSequence([seed, member]).generate_state(1)[0])


def surrogate_temperature(model) -> callable:
    """Batch objective returning the predicted heat-sink temperature T_s."""
    return lambda y: np.atleast_1d(model.predict(y))


def junction_objective(ts_model, constants: ThermalConstants = ThermalConstants()):
    """Batch objective returning T_j computed from a T_s model."""
    def f(y):
        ts = np.atleast_1d(ts_model(y) if not isinstance(ts_model, PceModel) else ts_model.predict(y))
        return junction_temperature(ts, y[:, 7], y[:, 8], constants)
    return f


def volume_objective(y):
    return np.atleast_1d(heatsink_volume(y))


def single_objective_problem(model, pins=DEFAULT_PINS, budget: int = 5000, seed: int = 0,
                             specs=DEFAULT_SPECS) -> OptProblem:
    """Minimise T_s of ``model`` (a PceModel or batch callable) with pinned T_a and P."""
    f = surrogate_temperature(model) if isinstance(model, PceModel) else model
    return OptProblem((f,), specs, pins, budget, seed)


def bi_objective_problem(model, pins=DEFAULT_PINS, budget: int = 20000, seed: int = 0,
                         constants: ThermalConstants = ThermalConstants(), specs=DEFAULT_SPECS) -> OptProblem:
    """Minimise (T_j, V_s) with T_j derived from the T_s model."""
    return OptProblem((junction_objective(model, constants), volume_objective), specs, pins, budget, seed)


def minimize(problem: OptProblem, algorithm: str, **options) -> OptResult:
    try:
        fn = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown single-objective algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}") from None
    return fn(problem, **options)


@dataclass(frozen=True)
class AggregatedOptimum:
    mu_ts_min: float
    sigma_ts_min: float
    six_sigma_tj: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    mean_evaluations: float
    members: int


def aggregate_optima(ts_min, designs, evaluations, T_a: float, P: float,
                     constants: ThermalConstants = ThermalConstants()) -> AggregatedOptimum:
    """Population mean/std of per-member optima and the six-sigma junction temperature."""
    ts = np.asarray(ts_min, dtype=float)
    designs = np.atleast_2d(np.asarray(designs, dtype=float))
    mu, sigma = float(ts.mean()), float(ts.std())
    return AggregatedOptimum(
        mu_ts_min=mu,
        sigma_ts_min=sigma,
        six_sigma_tj=junction_temperature(mu + 6.0 * sigma, T_a, P, constants),
        feature_mean=designs.mean(axis=0),
        feature_std=designs.std(axis=0),
        mean_evaluations=float(np.mean(evaluations)),
        members=len(ts),
    )


def _map(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def optimize_over_ensemble(ensemble: EnsembleModel, algorithm: str = "pso", pins=DEFAULT_PINS,
                           seed: int = 0, budget: int | None = None, threads: int = 1,
                           constants: ThermalConstants = ThermalConstants(),
                           options: dict | None = None) -> tuple[AggregatedOptimum, list[OptResult]]:
    """Solve the pinned single-objective problem once per member and aggregate.

    Optimal designs are reported with N_f rounded to an integer; the minimum
    temperatures are the optimiser's values at the continuous optimum.
    """
    specs = ensemble.specs
    budget = DEFAULT_BUDGETS[algorithm] if budget is None else budget
    options = options or {}

    def run(i):
        prob = single_objective_problem(ensemble.members[i], pins, budget, member_seed(seed, i), specs)
        return minimize(prob, algorithm, **options)

    results = _map(run, range(len(ensemble)), threads)
    designs = round_integer_features(np.array([r.best_point for r in results]), specs)
    pinned = {feature_index(k, specs): float(v) for k, v in dict(pins).items()}
    ta_idx, p_idx = feature_index("T_a", specs), feature_index("P", specs)
    if ta_idx not in pinned or p_idx not in pinned:
        raise ValueError("six-sigma reporting needs pinned T_a and P")
    T_a, P = pinned[ta_idx], pinned[p_idx]
    agg = aggregate_optima([r.best_value for r in results], designs, [r.evaluations for r in results],
                           T_a, P, constants)
    return agg, results


def pareto_over_ensemble(ensemble: EnsembleModel, pins=DEFAULT_PINS, seed: int = 0,
                         budget: int | None = None, threads: int = 1,
                         constants: ThermalConstants = ThermalConstants(),
                         options: dict | None = None) -> list[ParetoFront]:
    """One (T_j, V_s) Pareto front per ensemble member; fronts are not merged."""
    budget = DEFAULT_BUDGETS["nsga2"] if budget is None else budget
    options = options or {}

    def run(i):
        prob = bi_objective_problem(ensemble.members[i], pins, budget, member_seed(seed, i), constants,
                                    ensemble.specs)
        return minimize_nsga2(prob, **options)

    return _map(run, range(len(ensemble)), threads)
