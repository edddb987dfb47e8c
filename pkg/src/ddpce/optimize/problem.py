"""Box-constrained optimisation problems with pinned features."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from ..features import DEFAULT_SPECS, FeatureSpec, feature_index

# An objective maps a batch of full design points, shape (n, N), to values of shape (n,).
Objective = Callable[[np.ndarray], np.ndarray]


class WrongAlgorithmError(ValueError):
    """The problem has the wrong number of objectives for the chosen algorithm."""


class FeasibilityError(AssertionError):
    """An algorithm tried to evaluate a point outside the box or off the pins."""


@dataclass(frozen=True, eq=False)
class OptProblem:
    """Minimise one or two objectives over a feature box with equality pins.

    Pinned features are removed from the search space; algorithms work on
    the free features in unit coordinates ``[0, 1]^d``.
    """

    objectives: tuple[Objective, ...]
    specs: tuple[FeatureSpec, ...] = DEFAULT_SPECS
    pins: Mapping[str, float] = field(default_factory=dict)
    budget: int = 20000
    seed: int = 0

    def __post_init__(self):
        objs = self.objectives if isinstance(self.objectives, (tuple, list)) else (self.objectives,)
        object.__setattr__(self, "objectives", tuple(objs))
        object.__setattr__(self, "specs", tuple(self.specs))
        if not 1 <= len(self.objectives) <= 2:
            raise ValueError("a problem has one or two objectives")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        pinned = {}
        for name, value in dict(self.pins).items():
            j = feature_index(name, self.specs)
            s = self.specs[j]
            if not s.lower <= value <= s.upper:
                raise ValueError(f"pin {s.name}={value} outside [{s.lower}, {s.upper}]")
            pinned[j] = float(value)
        object.__setattr__(self, "_pinned", pinned)
        free = [j for j in range(len(self.specs)) if j not in pinned]
        if not free:
            raise ValueError("every feature is pinned")
        object.__setattr__(self, "free", np.array(free, dtype=int))

    @property
    def n_objectives(self) -> int:
        return len(self.objectives)

    @property
    def dim(self) -> int:
        return len(self.free)

    @property
    def pinned(self) -> dict[int, float]:
        return dict(self._pinned)

    def to_full(self, u: np.ndarray) -> np.ndarray:
        """Map unit coordinates of the free features to full physical points."""
        u = np.atleast_2d(u)
        lower = np.array([s.lower for s in self.specs])
        upper = np.array([s.upper for s in self.specs])
        y = np.empty((u.shape[0], len(self.specs)))
        for j, val in self._pinned.items():
            y[:, j] = val
        lo, hi = lower[self.free], upper[self.free]
        y[:, self.free] = np.clip(lo + u * (hi - lo), lo, hi)
        return y


class Evaluator:
    """Objective wrapper that counts evaluations, enforces the budget and
    checks every candidate for box and pin feasibility."""

    def __init__(self, problem: OptProblem):
        self.problem = problem
        self.count = 0
        lower = np.array([s.lower for s in problem.specs])
        upper = np.array([s.upper for s in problem.specs])
        self._lower, self._upper = lower, upper

    @property
    def remaining(self) -> int:
        return self.problem.budget - self.count

    def __call__(self, u: np.ndarray) -> np.ndarray:
        """Evaluate unit-coordinate candidates; returns shape (n, n_objectives)."""
        u = np.atleast_2d(u)
        if len(u) > self.remaining:
            raise FeasibilityError(f"evaluation budget {self.problem.budget} exceeded")
        if not np.all((u >= 0.0) & (u <= 1.0)):
            raise FeasibilityError("candidate outside the unit box")
        y = self.problem.to_full(u)
        if np.any(y < self._lower) or np.any(y > self._upper):
            raise FeasibilityError("candidate outside the feature box")
        for j, val in self.problem.pinned.items():
            if np.any(y[:, j] != val):
                raise FeasibilityError("pinned feature perturbed")
        self.count += len(u)
        vals = np.column_stack([np.asarray(f(y), dtype=float).reshape(len(u)) for f in self.problem.objectives])
        # NaN objectives would poison comparisons
        vals[~np.isfinite(vals)] = np.inf
        return vals


@dataclass(frozen=True, eq=False)
class OptResult:
    best_point: np.ndarray
    best_value: float
    evaluations: int
    trace: tuple[float, ...]

    @property
    def iterations(self) -> int:
        return len(self.trace)


def require_objectives(problem: OptProblem, n: int, algorithm: str) -> None:
    if problem.n_objectives != n:
        raise WrongAlgorithmError(
            f"{algorithm} handles {n}-objective problems, got {problem.n_objectives}"
        )


def stagnated(trace: Sequence[float], window: int, tol: float) -> bool:
    """True after ``window`` consecutive iterations each improving the best value by less than ``tol``."""
    if len(trace) <= window:
        return False
    recent = np.asarray(trace[-window - 1:], dtype=float)
    return bool(np.all(recent[:-1] - recent[1:] < tol))
