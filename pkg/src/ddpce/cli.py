"""Command-line pipeline: generate, train, test, sobol, optimize, moo, report.

Exit codes: 0 success, 2 usage or configuration error, 3 data or I/O
error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .basis import CapacityError, DegenerateModelError, sobol_indices
from .config import ConfigError, RunConfig, load_config
from .ensemble import (
    EnsembleModel,
    SplitPlan,
    error_stats,
    predict_with_uncertainty,
    read_error_stats,
    train_ensemble,
    write_error_stats,
)
from .features import (
    CSV_HEADER,
    feature_index,
    BoundsError,
    Dataset,
    ParseError,
    load_csv,
    load_points,
    sample_uniform,
    save_csv,
)
from .optimize.heatsink import optimize_over_ensemble, pareto_over_ensemble
from .regression import ConditioningError, InsufficientDataError, UnderdeterminedError
from .thermal import synthetic_oracle

log = logging.getLogger("ddpce")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4


class DataError(Exception):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _data_path(cfg: RunConfig, out: Path) -> Path:
    p = Path(cfg.data.path)
    return p if p.is_absolute() else out / p


def _ensemble_dir(out: Path, M: int) -> Path:
    return out / "ensembles" / f"M{M}"


def _load_ensembles(cfg: RunConfig, out: Path) -> list[tuple[int, EnsembleModel]]:
    found = []
    for M in cfg.ensemble.train_sizes:
        d = _ensemble_dir(out, M)
        if not (d / "meta.json").is_file():
            raise DataError(f"missing trained ensemble for M={M} at {d}; run 'train' first")
        found.append((M, EnsembleModel.load(d)))
    return found


def cmd_generate(cfg: RunConfig, out: Path, args) -> None:
    count = args.count if args.count is not None else cfg.data.count
    if count < 1:
        raise ConfigError(f"sample count must be >= 1, got {count}")
    points = sample_uniform(count, cfg.specs, cfg.seed)
    ds = Dataset(points, synthetic_oracle(points))
    path = _data_path(cfg, out)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_csv(ds, path)
    log.info("wrote %d oracle-labelled rows to %s", count, path)


def cmd_train(cfg: RunConfig, out: Path, args) -> None:
    ds = load_csv(_data_path(cfg, out), cfg.specs)
    J = cfg.ensemble.test_size
    plans = []
    for M in cfg.ensemble.train_sizes:
        plan = SplitPlan(cfg.seed, cfg.ensemble.members, M, J)
        if M + J > len(ds):
            raise ConfigError(f"infeasible plan: M={M} + J={J} = {M + J} exceeds the {len(ds)} dataset rows")
        plans.append(plan)
    stats, sizes = [], []
    for plan in plans:
        ens = train_ensemble(ds, plan, cfg.fit, cfg.specs, threads=args.threads)
        ens.save(_ensemble_dir(out, plan.train_size))
        stats.append((plan.train_size, error_stats(ens)))
        k = np.array([len(m.basis) for m in ens.members])
        sizes.append([plan.train_size, _fmt(k.mean()), _fmt(k.std()), int(k.min()), int(k.max())])
        log.info("M=%d: trained %d members, mu(eps_mean)=%.4g", plan.train_size, len(ens), stats[-1][1].mu_mean)
    write_error_stats(stats, out / "err_stats.csv")
    _write_csv(out / "basis_sizes.csv", ["M", "mean", "std", "min", "max"], sizes)


def cmd_test(cfg: RunConfig, out: Path, args) -> None:
    source = Path(args.input) if args.input else _data_path(cfg, out)
    points, truth = load_points(source, cfg.specs)
    for M, ens in _load_ensembles(cfg, out):
        mean, std = predict_with_uncertainty(ens, points)
        header = ["row", "Ts_mean", "Ts_std"] + (["Ts_C", "rel_err"] if truth is not None else [])
        rows = []
        for i in range(len(points)):
            row = [i, _fmt(mean[i]), _fmt(std[i])]
            if truth is not None:
                row += [_fmt(truth[i]), _fmt(abs((truth[i] - mean[i]) / truth[i]))]
            rows.append(row)
        _write_csv(out / "test" / f"M{M}.csv", header, rows)


def cmd_sobol(cfg: RunConfig, out: Path, args) -> None:
    rows = []
    for M, ens in _load_ensembles(cfg, out):
        idx = [sobol_indices(m) for m in ens.members]
        first = np.array([s.first for s in idx])
        total = np.array([s.total for s in idx])
        for j, spec in enumerate(ens.specs):
            rows.append([M, spec.column, _fmt(first[:, j].mean()), _fmt(first[:, j].std()),
                         _fmt(total[:, j].mean()), _fmt(total[:, j].std())])
    _write_csv(out / "sobol.csv", ["M", "feature", "S1_mean", "S1_std", "ST_mean", "ST_std"], rows)


def cmd_optimize(cfg: RunConfig, out: Path, args) -> None:
    algorithm = args.algorithm or cfg.optimizer.algorithm
    specs = cfg.specs
    columns = []
    for M, ens in _load_ensembles(cfg, out):
        agg, _ = optimize_over_ensemble(ens, algorithm, cfg.optimizer.pins, cfg.seed, cfg.optimizer.budget,
                                        args.threads, cfg.thermal)
        columns.append((M, agg))
    labels = ["evaluations_mean", "Ts_min_mean", "Ts_min_std", "Tj_min_six_sigma"]
    pinned = {feature_index(k, specs) for k in cfg.optimizer.pins}
    free = [(j, s) for j, s in enumerate(specs) if j not in pinned]
    for _, s in free:
        labels += [f"{s.column}_mean", f"{s.column}_std"]
    rows = []
    for label in labels:
        row = [label]
        for _, agg in columns:
            if label == "evaluations_mean":
                row.append(_fmt(agg.mean_evaluations))
            elif label == "Ts_min_mean":
                row.append(_fmt(agg.mu_ts_min))
            elif label == "Ts_min_std":
                row.append(_fmt(agg.sigma_ts_min))
            elif label == "Tj_min_six_sigma":
                row.append(_fmt(agg.six_sigma_tj))
            else:
                col, stat = label.rsplit("_", 1)
                j = next(j for j, s in free if s.column == col)
                row.append(_fmt((agg.feature_mean if stat == "mean" else agg.feature_std)[j]))
        rows.append(row)
    _write_csv(out / f"optimum_{algorithm}.csv", ["quantity"] + [f"M={M}" for M, _ in columns], rows)


def cmd_moo(cfg: RunConfig, out: Path, args) -> None:
    header = ["Tj_C", "Vs_mm3"] + list(CSV_HEADER[:-1])
    evals = []
    options = {"population": cfg.moo.population, "generations": cfg.moo.generations}
    for M, ens in _load_ensembles(cfg, out):
        fronts = pareto_over_ensemble(ens, cfg.optimizer.pins, cfg.seed, cfg.moo.budget, args.threads,
                                      cfg.thermal, options)
        width = len(str(len(fronts) - 1))
        for stale in (out / "pareto" / f"M{M}").glob("member_*.csv"):
            stale.unlink()
        for i, front in enumerate(fronts):
            rows = [[_fmt(tj), _fmt(vs)] + [_fmt(v) for v in y] for tj, vs, y in front]
            _write_csv(out / "pareto" / f"M{M}" / f"member_{i:0{width}d}.csv", header, rows)
        evals.append([M, _fmt(np.mean([f.evaluations for f in fronts]))])
    _write_csv(out / "moo_evaluations.csv", ["M", "evaluations_mean"], evals)


def cmd_report(cfg: RunConfig, out: Path, args) -> None:
    stats_path = out / "err_stats.csv"
    pareto_dirs = [(M, out / "pareto" / f"M{M}") for M in cfg.ensemble.train_sizes]
    missing = [str(stats_path)] if not stats_path.is_file() else []
    missing += [str(d) for _, d in pareto_dirs if not any(d.glob("member_*.csv"))]
    if missing:
        raise DataError("missing report inputs:\n  " + "\n  ".join(missing))
    report = out / "report"
    rows = []
    for M, s in read_error_stats(stats_path):
        for key in ("mu_mean", "sigma_mean", "mu_max", "sigma_max", "worst"):
            rows.append([M, key, _fmt(getattr(s, key))])
    _write_csv(report / "error_curves.csv", ["M", "statistic", "value"], rows)
    for M, d in pareto_dirs:
        rows = []
        for f in sorted(d.glob("member_*.csv"), key=lambda p: int(p.stem.split("_")[1])):
            member = int(f.stem.split("_")[1])
            with open(f, newline="", encoding="utf-8") as fh:
                for r in csv.DictReader(fh):
                    rows.append([member, r["Tj_C"], r["Vs_mm3"]])
        _write_csv(report / f"pareto_M{M}.csv", ["member", "Tj_C", "Vs_mm3"], rows)


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "test": cmd_test,
    "sobol": cmd_sobol,
    "optimize": cmd_optimize,
    "moo": cmd_moo,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--seed", type=int, help="master seed; overrides the config everywhere")
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--out", default="results", help="output directory (default: results)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ddpce", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", parents=[common], help="write an oracle-labelled dataset")
    gen.add_argument("--count", type=int, help="number of rows (default: data.count)")
    sub.add_parser("train", parents=[common], help="train one ensemble per training size")
    test = sub.add_parser("test", parents=[common], help="ensemble predictions with uncertainty")
    test.add_argument("--input", help="CSV of design points (Ts_C optional); default: the dataset")
    sub.add_parser("sobol", parents=[common], help="Sobol indices across ensemble members")
    opt = sub.add_parser("optimize", parents=[common], help="single-objective optimisation per member")
    opt.add_argument("--algorithm", choices=["pso", "de"])
    sub.add_parser("moo", parents=[common], help="NSGA-II Pareto fronts per member")
    sub.add_parser("report", parents=[common], help="tidy plot-data CSVs")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be non-negative")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        # single-threaded BLAS everywhere keeps results independent of --threads
        with threadpool_limits(limits=1):
            COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ParseError, BoundsError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConditioningError, DegenerateModelError, InsufficientDataError, UnderdeterminedError,
            CapacityError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
