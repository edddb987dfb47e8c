"""Per-member (T_j, V_s) Pareto fronts from NSGA-II on surrogate ensembles.

Writes one long-format CSV per training size with columns
``member,Tj_C,Vs_mm3,<features>``, plus the oracle's own front as a
reference, ready for external plotting.

    python3 scripts/pareto_study.py --members 10 --sizes 100 800 --out results/pareto_study
"""

import argparse
import csv
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from ddpce.ensemble import FitSettings, SplitPlan, train_ensemble
from ddpce.features import CSV_HEADER, DEFAULT_SPECS, Dataset, sample_uniform
from ddpce.optimize import OptProblem, minimize_nsga2, pareto_over_ensemble
from ddpce.optimize.heatsink import DEFAULT_PINS, volume_objective
from ddpce.thermal import junction_temperature, synthetic_oracle


def write_fronts(path: Path, fronts):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["member", "Tj_C", "Vs_mm3", *CSV_HEADER[:-1]])
        for i, front in enumerate(fronts):
            for tj, vs, y in front:
                w.writerow([i, repr(tj), repr(vs), *(repr(float(v)) for v in y)])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--members", type=int, default=10)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 800])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/pareto_study")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    y = sample_uniform(935, seed=args.seed)
    data = Dataset(y, synthetic_oracle(y))

    def oracle_tj(points):
        return junction_temperature(synthetic_oracle(points), points[:, 7], points[:, 8])

    with threadpool_limits(limits=1):
        ref = minimize_nsga2(OptProblem((oracle_tj, volume_objective), DEFAULT_SPECS, DEFAULT_PINS, 20000,
                                        args.seed))
        write_fronts(out / "oracle.csv", [ref])
        F = ref.objectives
        print(f"oracle front: {len(ref)} points, T_j {F[:, 0].min():.1f}..{F[:, 0].max():.1f} degC, "
              f"V_s {F[:, 1].min():.0f}..{F[:, 1].max():.0f} mm^3")
        for M in args.sizes:
            ens = train_ensemble(data, SplitPlan(args.seed, args.members, M, 135), FitSettings(),
                                 threads=args.threads)
            fronts = pareto_over_ensemble(ens, DEFAULT_PINS, args.seed, threads=args.threads)
            write_fronts(out / f"M{M}.csv", fronts)
            # spread of the member fronts: T_j at the median oracle volume
            v_mid = float(np.median(F[:, 1]))
            tj_at = [np.interp(v_mid, f.objectives[:, 1], f.objectives[:, 0]) for f in fronts]
            print(f"M={M}: {len(fronts)} fronts, T_j at V_s={v_mid:.0f}: "
                  f"{np.mean(tj_at):.2f} +- {np.std(tj_at):.2f} degC (oracle "
                  f"{np.interp(v_mid, F[:, 1], F[:, 0]):.2f})")


if __name__ == "__main__":
    main()
