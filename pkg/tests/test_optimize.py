import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddpce.basis import PceModel, total_degree_set
from ddpce.ensemble import EnsembleModel, FitSettings, SplitPlan
from ddpce.features import DEFAULT_SPECS, FeatureSpec, bounds_arrays, feature_index
from ddpce.optimize import (
    Evaluator,
    FeasibilityError,
    OptProblem,
    WrongAlgorithmError,
    aggregate_optima,
    hypervolume_2d,
    minimize_de,
    minimize_nsga2,
    minimize_pso,
    optimize_over_ensemble,
    pareto_filter,
    pareto_over_ensemble,
)
from ddpce.optimize.heatsink import DEFAULT_BUDGETS, DEFAULT_PINS
from ddpce.optimize.nsga2 import crowding_distance, fast_nondominated_sort
from ddpce.thermal import junction_temperature, synthetic_oracle

from oracles import pareto_bruteforce

LOWER, UPPER = bounds_arrays()
MID = 0.5 * (LOWER + UPPER)
PINS = {"T_a": 45.0, "P": 140.0}
LINE = (FeatureSpec("x", "x", "-", -2.0, 4.0),)
ANALYTIC_HV = 67.0 / 3.0  # area under (sqrt(f1) - 2)^2 on [0, 4], clipped to the (5, 5) box


def sphere(y):
    return np.sum((y - MID) ** 2, axis=1)


def oracle_problem(budget, seed):
    return OptProblem((synthetic_oracle,), DEFAULT_SPECS, PINS, budget, seed)


def line_problem(budget=20000, seed=0):
    return OptProblem((lambda y: y[:, 0] ** 2, lambda y: (y[:, 0] - 2.0) ** 2), LINE, {}, budget, seed)


# --- problem and evaluator ---------------------------------------------------

def test_problem_validation():
    with pytest.raises(ValueError):
        OptProblem((sphere,), pins={"P": 200.0})
    with pytest.raises(ValueError):
        OptProblem((sphere, sphere, sphere))
    p = OptProblem((sphere,), pins=PINS)
    assert p.dim == 7 and p.pinned == {7: 45.0, 8: 140.0}


def test_evaluator_counts_and_enforces():
    p = OptProblem((sphere,), pins=PINS, budget=10)
    ev = Evaluator(p)
    ev(np.full((4, 7), 0.5))
    assert ev.count == 4 and ev.remaining == 6
    with pytest.raises(FeasibilityError):
        ev(np.full((1, 7), 1.5))
    with pytest.raises(FeasibilityError):
        ev(np.full((7, 7), 0.5))


def test_wrong_algorithm():
    with pytest.raises(WrongAlgorithmError):
        minimize_pso(line_problem())
    with pytest.raises(WrongAlgorithmError):
        minimize_de(line_problem())
    with pytest.raises(WrongAlgorithmError):
        minimize_nsga2(OptProblem((sphere,)))


# --- single objective --------------------------------------------------------

@pytest.mark.parametrize("algo", [minimize_pso, minimize_de])
def test_sphere_default_budget(algo):
    budget = DEFAULT_BUDGETS["pso" if algo is minimize_pso else "de"]
    res = algo(OptProblem((sphere,), budget=budget, seed=1))
    assert res.best_value < 1e-6 and res.evaluations <= budget


@pytest.mark.xfail(strict=True, reason="the stated small budgets are not enough with the fixed hyperparameters")
@pytest.mark.parametrize("algo,budget", [(minimize_pso, 2000), (minimize_de, 8000)])
def test_sphere_small_budget(algo, budget):
    res = algo(OptProblem((sphere,), budget=budget, seed=1))
    assert res.best_value < 1e-6


@pytest.mark.parametrize("algo", [minimize_pso, minimize_de])
def test_oracle_corner_and_pins(algo):
    res = algo(oracle_problem(DEFAULT_BUDGETS["pso" if algo is minimize_pso else "de"], 3))
    assert res.best_point[7] == 45.0 and res.best_point[8] == 140.0
    assert abs(res.best_point[feature_index("v")] - 5.0) <= 1e-2
    assert np.all(res.best_point >= LOWER) and np.all(res.best_point <= UPPER)
    assert res.best_value == pytest.approx(synthetic_oracle(res.best_point), abs=1e-12)


@pytest.mark.parametrize("algo", [minimize_pso, minimize_de])
def test_deterministic_and_counted(algo):
    a = algo(oracle_problem(1500, 9))
    b = algo(oracle_problem(1500, 9))
    assert np.array_equal(a.best_point, b.best_point) and a.best_value == b.best_value
    assert a.trace == b.trace and a.evaluations == b.evaluations <= 1500
    assert all(x >= y for x, y in zip(a.trace, a.trace[1:]))


@pytest.mark.parametrize("algo", [minimize_pso, minimize_de])
def test_budget_respected_and_counted(algo):
    calls = []

    def f(y):
        calls.append(len(y))
        return sphere(y)

    res = algo(OptProblem((f,), pins=PINS, budget=333, seed=0))
    assert res.evaluations == sum(calls) <= 333


def test_pso_de_agree_on_oracle():
    p = minimize_pso(oracle_problem(DEFAULT_BUDGETS["pso"], 4))
    d = minimize_de(oracle_problem(DEFAULT_BUDGETS["de"], 4))
    assert abs(p.best_value - d.best_value) < 0.5


# --- Pareto utilities --------------------------------------------------------

def test_pareto_examples():
    f = pareto_filter([(1, 2, "a"), (2, 1, "b"), (2, 2, "c")])
    assert [(e[0], e[1]) for e in f] == [(2, 1), (1, 2)] and f.payloads == ["b", "a"]
    assert len(pareto_filter([(3, 3, None)])) == 1
    curve = [(x, 1.0 / x, None) for x in np.linspace(0.5, 5, 12)]
    assert len(pareto_filter(curve)) == 12
    with pytest.raises(ValueError):
        pareto_filter([])


def test_bruteforce_oracle_examples():
    assert sorted(pareto_bruteforce([(1, 2), (2, 1), (2, 2)])) == [(1, 2), (2, 1)]
    assert len(pareto_bruteforce([(1, 1)] * 4)) == 4
    assert pareto_bruteforce([(1, 1), (2, 2), (3, 3)]) == [(1, 1)]


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=1, max_size=60))
def test_pareto_filter_matches_bruteforce(points):
    ours = sorted((e[0], e[1]) for e in pareto_filter([(a, b, None) for a, b in points]))
    ref = sorted((float(a), float(b)) for a, b in pareto_bruteforce(points))
    assert ours == ref


def test_pareto_filter_matches_bruteforce_large():
    F = np.random.default_rng(0).random((1000, 2))
    ours = sorted((e[0], e[1]) for e in pareto_filter([(a, b, None) for a, b in F]))
    assert ours == sorted(pareto_bruteforce([tuple(r) for r in F]))


def test_hypervolume_simple():
    assert hypervolume_2d([[1, 1]], (2, 2)) == 1.0
    assert hypervolume_2d([[0, 1], [1, 0]], (2, 2)) == 3.0
    assert hypervolume_2d([[3, 3]], (2, 2)) == 0.0


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), min_size=1, max_size=30))
def test_nondominated_sort_ranks(points):
    F = np.array(points, dtype=float)
    rank = fast_nondominated_sort(F)
    first = {tuple(r) for r in F[rank == 0]}
    assert first == {tuple(map(float, p)) for p in pareto_bruteforce(points)}
    for i in range(len(F)):
        for j in range(len(F)):
            if np.all(F[i] <= F[j]) and np.any(F[i] < F[j]):
                assert rank[i] < rank[j]
    d = crowding_distance(F)
    assert np.all(d >= 0)


# --- NSGA-II ------------------------------------------------------------------

def test_nsga2_line_benchmark():
    front = minimize_nsga2(line_problem(seed=2))
    hv = hypervolume_2d(front.objectives, (5.0, 5.0))
    assert abs(hv - ANALYTIC_HV) / ANALYTIC_HV <= 0.02
    x = np.array([p[0] for p in front.payloads])
    assert np.all((x >= -1e-3) & (x <= 2 + 1e-3))
    assert 10_000 <= front.evaluations <= 20_000


def test_nsga2_oracle_front_sorted_and_nondominated():
    from ddpce.thermal import heatsink_volume
    prob = OptProblem((lambda y: junction_temperature(synthetic_oracle(y), y[:, 7], y[:, 8]),
                       lambda y: np.atleast_1d(heatsink_volume(y))), DEFAULT_SPECS, PINS, 3000, 5)
    front = minimize_nsga2(prob, population=40, generations=40)
    F = front.objectives
    assert np.all(np.diff(F[:, 1]) >= 0) and np.all(np.diff(F[:, 0]) <= 0)
    assert sorted(map(tuple, F)) == sorted(pareto_bruteforce([tuple(r) for r in F]))
    for y in front.payloads:
        assert y[7] == 45.0 and y[8] == 140.0


def test_nsga2_deterministic():
    a = minimize_nsga2(line_problem(budget=2000, seed=4), population=20, generations=30)
    b = minimize_nsga2(line_problem(budget=2000, seed=4), population=20, generations=30)
    assert np.array_equal(a.objectives, b.objectives) and a.evaluations == b.evaluations


# --- ensemble aggregation ----------------------------------------------------

def test_aggregate_six_sigma_examples():
    designs = np.zeros((2, 9))
    for (mu, sigma, expected) in [(60.5, 0.7, 168.3), (59.1, 1.2, 169.9)]:
        agg = aggregate_optima([mu - sigma, mu + sigma], designs, [10, 20], 45.0, 140.0)
        assert agg.mu_ts_min == pytest.approx(mu) and agg.sigma_ts_min == pytest.approx(sigma)
        assert agg.six_sigma_tj == pytest.approx(expected, abs=0.05)
        assert agg.mean_evaluations == 15.0


def _linear_member(c0, cv):
    basis = total_degree_set(9, 1)
    coef = np.zeros(len(basis))
    coef[0] = c0
    coef[basis.position(tuple(1 if i == 6 else 0 for i in range(9)))] = cv
    return PceModel(basis, coef)


def test_identical_members_zero_spread():
    m = _linear_member(60.0, -2.0)
    ens = EnsembleModel((m, m, m), ((0, 0),) * 3, SplitPlan(0, 3, 10, 0), FitSettings())
    # members get different optimiser seeds, so the spread is only zero up to convergence
    agg, results = optimize_over_ensemble(ens, "pso", seed=0)
    assert agg.sigma_ts_min == pytest.approx(0.0, abs=1e-3)
    assert agg.six_sigma_tj == junction_temperature(agg.mu_ts_min + 6 * agg.sigma_ts_min, 45.0, 140.0)
    exact = aggregate_optima([58.0] * 3, np.zeros((3, 9)), [1, 1, 1], 45.0, 140.0)
    assert exact.sigma_ts_min == 0.0 and exact.six_sigma_tj == junction_temperature(58.0, 45.0, 140.0)
    assert agg.mu_ts_min == pytest.approx(60.0 - 2.0 * np.sqrt(3.0), abs=1e-3)
    assert agg.feature_mean[6] == pytest.approx(5.0, abs=1e-3)


def test_optimize_over_ensemble_threads_and_rounding():
    members = tuple(_linear_member(60.0 + i, -1.0 - 0.1 * i) for i in range(4))
    ens = EnsembleModel(members, ((0, 0),) * 4, SplitPlan(0, 4, 10, 0), FitSettings())
    a, ra = optimize_over_ensemble(ens, "de", seed=3, budget=800, threads=1)
    b, rb = optimize_over_ensemble(ens, "de", seed=3, budget=800, threads=3)
    assert np.array_equal(a.feature_mean, b.feature_mean) and a.mu_ts_min == b.mu_ts_min
    nf = a.feature_mean[feature_index("N_f")] * 4
    assert nf == pytest.approx(round(nf))
    assert all(r.best_point[7] == 45.0 for r in ra)


def test_pareto_over_ensemble_one_front_per_member():
    members = tuple(_linear_member(60.0 + i, -1.0) for i in range(2))
    ens = EnsembleModel(members, ((0, 0),) * 2, SplitPlan(0, 2, 10, 0), FitSettings())
    fronts = pareto_over_ensemble(ens, DEFAULT_PINS, seed=1, budget=1000,
                                  options={"population": 20, "generations": 20})
    assert len(fronts) == 2 and all(len(f) > 0 for f in fronts)
    assert all(f.evaluations <= 1000 for f in fronts)
