"""NSGA-II for bi-objective problems."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .pareto import ParetoFront, nondominated_mask, pareto_filter
from .problem import Evaluator, OptProblem, require_objectives


def fast_nondominated_sort(F: np.ndarray) -> np.ndarray:
    """Front rank of each row of ``F`` (0 = nondominated), for minimisation."""
    n = len(F)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dominates = le & lt  # dominates[i, j]: i dominates j
    dom_count = dominates.sum(axis=0)
    rank = np.full(n, -1, dtype=int)
    current = np.flatnonzero(dom_count == 0)
    r = 0
    while current.size:
        rank[current] = r
        dom_count = dom_count - dominates[current].sum(axis=0)
        dom_count[rank >= 0] = -1
        current = np.flatnonzero(dom_count == 0)
        r += 1
    return rank


def crowding_distance(F: np.ndarray) -> np.ndarray:
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        return np.full(n, np.inf)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        fk = F[order, k]
        span = fk[-1] - fk[0]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span > 0:
            dist[order[1:-1]] += (fk[2:] - fk[:-2]) / span
    return dist


def _sbx(rng, p1, p2, eta, prob):
    n, d = p1.shape
    c1, c2 = p1.copy(), p2.copy()
    do = (rng.random(n) < prob)[:, None] & (rng.random((n, d)) < 0.5)
    lo, hi = np.minimum(p1, p2), np.maximum(p1, p2)
    diff = hi - lo
    do &= diff > 1e-14
    u = rng.random((n, d))
    with np.errstate(divide="ignore", invalid="ignore"):
        safe = np.where(diff > 1e-14, diff, 1.0)
        # bounded SBX (Deb & Agrawal) on the unit box
        beta1 = 1.0 + 2.0 * lo / safe
        beta2 = 1.0 + 2.0 * (1.0 - hi) / safe
        out = []
        for beta in (beta1, beta2):
            alpha = 2.0 - beta ** (-(eta + 1.0))
            betaq = np.where(
                u <= 1.0 / alpha,
                (u * alpha) ** (1.0 / (eta + 1.0)),
                (1.0 / (2.0 - u * alpha)) ** (1.0 / (eta + 1.0)),
            )
            out.append(betaq)
    child_lo = 0.5 * (lo + hi - out[0] * diff)
    child_hi = 0.5 * (lo + hi + out[1] * diff)
    swap = rng.random((n, d)) < 0.5
    a = np.where(swap, child_hi, child_lo)
    b = np.where(swap, child_lo, child_hi)
    c1 = np.where(do, a, c1)
    c2 = np.where(do, b, c2)
    return np.clip(c1, 0.0, 1.0), np.clip(c2, 0.0, 1.0)


def _polynomial_mutation(rng, x, eta, prob):
    n, d = x.shape
    do = rng.random((n, d)) < prob
    u = rng.random((n, d))
    d1, d2 = x, 1.0 - x
    mut_pow = 1.0 / (eta + 1.0)
    lo_branch = (2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)) ** mut_pow - 1.0
    hi_branch = 1.0 - (2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)) ** mut_pow
    delta = np.where(u < 0.5, lo_branch, hi_branch)
    return np.clip(np.where(do, x + delta, x), 0.0, 1.0)


def _tournament(rng, rank, crowd, k):
    n = len(rank)
    a, b = rng.integers(0, n, k), rng.integers(0, n, k)
    a_wins = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] >= crowd[b]))
    return np.where(a_wins, a, b)


def _survivors(F: np.ndarray, size: int) -> np.ndarray:
    rank = fast_nondominated_sort(F)
    chosen = []
    for r in range(rank.max() + 1):
        front = np.flatnonzero(rank == r)
        if len(chosen) + len(front) <= size:
            chosen.extend(front.tolist())
            continue
        cd = crowding_distance(F[front])
        order = np.argsort(-cd, kind="stable")
        chosen.extend(front[order[: size - len(chosen)]].tolist())
        break
    return np.array(chosen, dtype=int)


def minimize_nsga2(problem: OptProblem, population: int = 100, generations: int = 140,
                   crossover_eta: float = 15.0, crossover_prob: float = 0.9,
                   mutation_eta: float = 20.0, mutation_prob: float | None = None) -> ParetoFront:
    """Approximate the Pareto front of a bi-objective problem with NSGA-II.

    Returns the nondominated members of the final population as a
    :class:`ParetoFront` whose payloads are full design points and whose
    ``evaluations`` field holds the number of objective evaluations.
    """
    require_objectives(problem, 2, "NSGA-II")
    rng = np.random.default_rng(problem.seed)
    evaluate = Evaluator(problem)
    d = problem.dim
    pm = 1.0 / d if mutation_prob is None else mutation_prob

    X = rng.random((population, d))
    F = evaluate(X)
    rank = fast_nondominated_sort(F)
    crowd = np.zeros(population)
    for r in range(rank.max() + 1):
        idx = np.flatnonzero(rank == r)
        crowd[idx] = crowding_distance(F[idx])

    for _ in range(generations):
        if evaluate.remaining < population:
            break
        parents = _tournament(rng, rank, crowd, population + population % 2)
        p1, p2 = X[parents[0::2]], X[parents[1::2]]
        c1, c2 = _sbx(rng, p1, p2, crossover_eta, crossover_prob)
        children = np.vstack([c1, c2])[:population]
        children = _polynomial_mutation(rng, children, mutation_eta, pm)
        Fc = evaluate(children)
        X_all, F_all = np.vstack([X, children]), np.vstack([F, Fc])
        keep = _survivors(F_all, population)
        X, F = X_all[keep], F_all[keep]
        rank = fast_nondominated_sort(F)
        for r in range(rank.max() + 1):
            idx = np.flatnonzero(rank == r)
            crowd[idx] = crowding_distance(F[idx])

    mask = nondominated_mask(F)
    full = problem.to_full(X[mask])
    front = pareto_filter((f[0], f[1], y) for f, y in zip(F[mask], full))
    return replace(front, evaluations=evaluate.count)
