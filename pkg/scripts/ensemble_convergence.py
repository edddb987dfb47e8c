"""Error statistics and basis size versus training-set size on the synthetic oracle.

Trains an ensemble of sparse-adaptive surrogates for each training size and
prints mu/sigma of the mean and max relative test errors, the worst case and
the basis-size summary. Writes a CSV next to the printed table.

    python3 scripts/ensemble_convergence.py --members 100 --sizes 100 200 400 800
"""

import argparse
import csv
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from ddpce.ensemble import FitSettings, SplitPlan, error_stats, train_ensemble
from ddpce.features import Dataset, sample_uniform
from ddpce.thermal import synthetic_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=935)
    ap.add_argument("--members", type=int, default=100)
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 300, 400, 500, 600, 700, 800])
    ap.add_argument("--test-size", type=int, default=135)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results/ensemble_convergence.csv")
    args = ap.parse_args()

    y = sample_uniform(args.rows, seed=args.seed)
    data = Dataset(y, synthetic_oracle(y))
    header = ["M", "mu_mean", "sigma_mean", "mu_max", "sigma_max", "worst", "basis_mean", "basis_std", "seconds"]
    rows = []
    print(" ".join(f"{h:>11s}" for h in header))
    with threadpool_limits(limits=1):
        for M in args.sizes:
            t0 = time.perf_counter()
            ens = train_ensemble(data, SplitPlan(args.seed, args.members, M, args.test_size), FitSettings(),
                                 threads=args.threads)
            s = error_stats(ens)
            k = np.array([len(m.basis) for m in ens.members])
            row = [M, s.mu_mean, s.sigma_mean, s.mu_max, s.sigma_max, s.worst, k.mean(), k.std(),
                   time.perf_counter() - t0]
            rows.append(row)
            print(f"{M:>11d} " + " ".join(f"{v:>11.4g}" for v in row[1:]))

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
