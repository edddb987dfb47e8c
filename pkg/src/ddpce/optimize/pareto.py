"""Pareto fronts for bi-objective minimisation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class ParetoFront:
    """Mutually nondominated ``(f1, f2, payload)`` entries sorted by ``f2`` ascending."""

    entries: tuple[tuple[float, float, Any], ...]
    evaluations: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def objectives(self) -> np.ndarray:
        """Array of shape (n, 2)."""
        return np.array([(e[0], e[1]) for e in self.entries], dtype=float).reshape(-1, 2)

    @property
    def payloads(self) -> list:
        return [e[2] for e in self.entries]


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    """Boolean mask of the nondominated rows of an (n, 2) objective array.

    Points with identical objective vectors do not dominate each other.
    """
    F = np.asarray(F, dtype=float)
    n = len(F)
    order = np.lexsort((F[:, 1], F[:, 0]))
    keep = np.zeros(n, dtype=bool)
    best_f2 = np.inf
    i = 0
    while i < n:
        j = i
        f1 = F[order[i], 0]
        while j < n and F[order[j], 0] == f1:
            j += 1
        group = order[i:j]
        gmin = F[group[0], 1]  # sorted by f2 inside a group
        if gmin < best_f2:
            keep[group[F[group, 1] == gmin]] = True
            best_f2 = gmin
        i = j
    return keep


def pareto_filter(points: Iterable[Sequence]) -> ParetoFront:
    """Nondominated subset of ``(f1, f2, payload)`` triples (component-wise minimisation)."""
    pts = [tuple(p) for p in points]
    if not pts:
        raise ValueError("pareto_filter needs at least one point")
    F = np.array([(p[0], p[1]) for p in pts], dtype=float)
    if not np.all(np.isfinite(F)):
        raise ValueError("objective values must be finite")
    keep = np.flatnonzero(nondominated_mask(F))
    keep = keep[np.lexsort((-F[keep, 0], F[keep, 1]))]
    return ParetoFront(tuple((float(F[k, 0]), float(F[k, 1]), pts[k][2] if len(pts[k]) > 2 else None) for k in keep))


def hypervolume_2d(F, reference) -> float:
    """Area dominated by the points in ``F`` and bounded by ``reference``."""
    F = np.asarray(F, dtype=float).reshape(-1, 2)
    r1, r2 = reference
    F = F[(F[:, 0] < r1) & (F[:, 1] < r2)]
    if len(F) == 0:
        return 0.0
    F = F[nondominated_mask(F)]
    F = F[np.lexsort((F[:, 1], F[:, 0]))]
    edges = np.append(F[1:, 0], r1)
    return float(np.sum((edges - F[:, 0]) * (r2 - F[:, 1])))
