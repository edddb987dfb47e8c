"""Ensemble-aggregated minimum heat-sink temperature with PSO and DE.

For each training size, trains an ensemble on the synthetic oracle, solves
the pinned single-objective problem once per member and reports the mean and
std of the optimum, the six-sigma junction temperature and the mean optimal
design. The oracle's own optimum is printed as a reference.

    python3 scripts/single_objective_study.py --members 20 --sizes 100 500 800
"""

import argparse

import numpy as np
from threadpoolctl import threadpool_limits

from ddpce.ensemble import FitSettings, SplitPlan, train_ensemble
from ddpce.features import DEFAULT_SPECS, Dataset, sample_uniform
from ddpce.optimize import OptProblem, minimize_de, minimize_pso, optimize_over_ensemble
from ddpce.optimize.heatsink import DEFAULT_BUDGETS, DEFAULT_PINS
from ddpce.thermal import junction_temperature, synthetic_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--members", type=int, default=20)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 800])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    y = sample_uniform(935, seed=args.seed)
    data = Dataset(y, synthetic_oracle(y))
    free = [s.column for s in DEFAULT_SPECS if s.name not in DEFAULT_PINS]

    with threadpool_limits(limits=1):
        for name, algo in (("pso", minimize_pso), ("de", minimize_de)):
            ref = algo(OptProblem((synthetic_oracle,), pins=DEFAULT_PINS, budget=DEFAULT_BUDGETS[name],
                                  seed=args.seed))
            tj = junction_temperature(ref.best_value, 45.0, 140.0)
            print(f"\n[{name}] oracle optimum T_s = {ref.best_value:.3f} degC, T_j = {tj:.2f} degC, "
                  f"{ref.evaluations} evaluations")
            print(f"{'M':>6s} {'evals':>8s} {'mu_Ts':>8s} {'sd_Ts':>7s} {'6sig_Tj':>8s}  "
                  + " ".join(f"{c:>7s}" for c in free))
            for M in args.sizes:
                ens = train_ensemble(data, SplitPlan(args.seed, args.members, M, 135), FitSettings(),
                                     threads=args.threads)
                agg, _ = optimize_over_ensemble(ens, name, DEFAULT_PINS, args.seed, threads=args.threads)
                design = np.delete(agg.feature_mean, [7, 8])
                print(f"{M:>6d} {agg.mean_evaluations:>8.0f} {agg.mu_ts_min:>8.3f} {agg.sigma_ts_min:>7.3f} "
                      f"{agg.six_sigma_tj:>8.2f}  " + " ".join(f"{v:>7.2f}" for v in design))


if __name__ == "__main__":
    main()
