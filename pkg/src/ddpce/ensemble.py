"""Ensembles of PCE surrogates trained on reshuffled train/test splits."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .basis import PceModel, make_basis
from .features import DEFAULT_SPECS, Dataset
from .regression import fit_lar, fit_ols, fit_sparse_adaptive


def relative_error(truth, pred):
    """``|(truth - pred) / truth|``, elementwise."""
    truth = np.asarray(truth, dtype=float)
    if np.any(truth == 0):
        raise ZeroDivisionError("relative error undefined for a zero reference value")
    out = np.abs((truth - np.asarray(pred, dtype=float)) / truth)
    return float(out) if out.ndim == 0 else out


def _paired(truths, preds):
    t = np.asarray(truths, dtype=float).ravel()
    p = np.asarray(preds, dtype=float).ravel()
    if t.size == 0 or t.size != p.size:
        raise ValueError(f"need equal nonempty lengths, got {t.size} and {p.size}")
    return t, p


def mape(truths, preds) -> float:
    """Mean absolute percentage error (as a fraction)."""
    t, p = _paired(truths, preds)
    return float(np.mean(relative_error(t, p)))


def max_ape(truths, preds) -> float:
    """Maximum absolute percentage error (as a fraction)."""
    t, p = _paired(truths, preds)
    return float(np.max(relative_error(t, p)))


@dataclass(frozen=True)
class SplitPlan:
    master_seed: int
    reshuffles: int
    train_size: int
    test_size: int

    def check(self, n_rows: int) -> None:
        if self.reshuffles < 1:
            raise ValueError("need at least one reshuffle")
        if self.train_size < 1 or self.test_size < 0:
            raise ValueError("train size must be >= 1 and test size >= 0")
        if self.train_size + self.test_size > n_rows:
            raise ValueError(
                f"infeasible split: M={self.train_size} + J={self.test_size} > {n_rows} rows"
            )

    def split(self, member: int, n_rows: int) -> tuple[np.ndarray, np.ndarray]:
        """Train and test row indices of ``member``; depends only on (master_seed, member)."""
        rng = np.random.default_rng(np.random.SeedSequence([self.master_seed, member]))
        perm = rng.permutation(n_rows)
        M, J = self.train_size, self.test_size
        return perm[:M], perm[M:M + J]


@dataclass(frozen=True)
class FitSettings:
    """Which regression route builds each member and with what parameters."""

    solver: str = "sparse-adaptive"  # sparse-adaptive | ols | lar
    basis: str = "total-degree"      # for ols / lar
    degree: int = 3
    q: float = 1.0
    cond_threshold: float = 10.0
    max_total_degree: int = 6
    max_active: int | None = None

    def fit(self, train: Dataset, specs=DEFAULT_SPECS):
        if self.solver == "sparse-adaptive":
            return fit_sparse_adaptive(train, self.max_total_degree, self.cond_threshold, specs)
        basis = make_basis(self.basis, len(specs), self.degree, self.q)
        if self.solver == "ols":
            return fit_ols(basis, train, specs)
        if self.solver == "lar":
            max_active = self.max_active
            if max_active is not None:
                max_active = min(max_active, len(train) - 1, len(basis))
            return fit_lar(basis, train, max_active, specs)
        raise ValueError(f"unknown solver {self.solver!r}")


@dataclass(frozen=True)
class ErrorStats:
    mu_mean: float
    sigma_mean: float
    mu_max: float
    sigma_max: float
    worst: float


@dataclass(frozen=True, eq=False)
class EnsembleModel:
    members: tuple[PceModel, ...]
    member_errors: tuple[tuple[float, float], ...]  # (eps_mean, eps_max) per member
    plan: SplitPlan
    settings: FitSettings = field(default_factory=FitSettings)

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble has no members")
        specs = self.members[0].specs
        if any(m.specs != specs for m in self.members):
            raise ValueError("ensemble members use different feature specs")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def specs(self):
        return self.members[0].specs

    def member_predictions(self, points) -> np.ndarray:
        """Predictions of every member; shape (I,) or (I, n)."""
        return np.array([m.predict(points) for m in self.members])

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        for stale in d.glob("member_*.json"):
            stale.unlink()
        meta = {
            "plan": asdict(self.plan),
            "settings": asdict(self.settings),
            "member_errors": [list(e) for e in self.member_errors],
        }
        (d / "meta.json").write_text(json.dumps(meta, indent=1) + "\n", encoding="utf-8")
        width = len(str(len(self.members) - 1))
        for i, m in enumerate(self.members):
            m.save(d / f"member_{i:0{width}d}.json")

    @classmethod
    def load(cls, directory) -> "EnsembleModel":
        d = Path(directory)
        meta_path = d / "meta.json"
        if not meta_path.is_file():
            raise FileNotFoundError(f"no ensemble at {d} (missing meta.json)")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        plan = SplitPlan(**meta["plan"])
        members = sorted(d.glob("member_*.json"), key=lambda p: int(p.stem.split("_")[1]))
        return cls(
            tuple(PceModel.load(p) for p in members),
            tuple(tuple(e) for e in meta["member_errors"]),
            plan,
            FitSettings(**meta["settings"]),
        )


def _train_member(dataset: Dataset, plan: SplitPlan, settings: FitSettings, specs, i: int):
    train_idx, test_idx = plan.split(i, len(dataset))
    model, _ = settings.fit(dataset.subset(train_idx), specs)
    model.provenance.update({"seed": plan.master_seed, "member": i})
    if len(test_idx):
        test = dataset.subset(test_idx)
        pred = model.predict(test.points)
        errs = (mape(test.responses, pred), max_ape(test.responses, pred))
    else:
        errs = (float("nan"), float("nan"))
    return model, errs


def train_ensemble(dataset: Dataset, plan: SplitPlan, settings: FitSettings = FitSettings(),
                   specs=DEFAULT_SPECS, threads: int = 1) -> EnsembleModel:
    """Fit one surrogate per reshuffle and record its test-split errors.

    Members are independent, so ``threads > 1`` fits them concurrently;
    the result does not depend on ``threads``.
    """
    plan.check(len(dataset))
    indices = range(plan.reshuffles)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: _train_member(dataset, plan, settings, specs, i), indices))
    else:
        results = [_train_member(dataset, plan, settings, specs, i) for i in indices]
    return EnsembleModel(
        tuple(r[0] for r in results),
        tuple(r[1] for r in results),
        plan,
        settings,
    )


def error_stats(ensemble: EnsembleModel) -> ErrorStats:
    """Population mean/std over members of the test errors, plus the worst case."""
    errs = np.asarray(ensemble.member_errors, dtype=float)
    if errs.size == 0:
        raise ValueError("empty ensemble")
    return ErrorStats(
        mu_mean=float(errs[:, 0].mean()),
        sigma_mean=float(errs[:, 0].std()),
        mu_max=float(errs[:, 1].mean()),
        sigma_max=float(errs[:, 1].std()),
        worst=float(errs[:, 1].max()),
    )


def predict_with_uncertainty(ensemble: EnsembleModel, points):
    """Mean and population standard deviation of the member predictions."""
    preds = ensemble.member_predictions(points)
    mean, std = preds.mean(axis=0), preds.std(axis=0)
    if np.ndim(points) == 1:
        return float(mean), float(std)
    return mean, std


ERROR_STATS_HEADER = ("M", "mu_mean", "sigma_mean", "mu_max", "sigma_max", "worst")


def write_error_stats(rows: Sequence[tuple[int, ErrorStats]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ERROR_STATS_HEADER)
        for M, s in rows:
            w.writerow([M, repr(s.mu_mean), repr(s.sigma_mean), repr(s.mu_max), repr(s.sigma_max), repr(s.worst)])


def read_error_stats(path) -> list[tuple[int, ErrorStats]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != ERROR_STATS_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [
            (int(r["M"]), ErrorStats(*(float(r[k]) for k in ERROR_STATS_HEADER[1:])))
            for r in reader
        ]
