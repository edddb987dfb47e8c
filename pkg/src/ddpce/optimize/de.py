"""Differential evolution, DE/rand/1/bin."""

from __future__ import annotations

import numpy as np

from .problem import Evaluator, OptProblem, OptResult, require_objectives, stagnated


def _distinct_triples(rng: np.random.Generator, n: int) -> np.ndarray:
    """For each target ``i`` three mutually distinct indices, all different from ``i``."""
    out = np.empty((n, 3), dtype=int)
    for i in range(n):
        choice = rng.choice(n - 1, size=3, replace=False)
        out[i] = choice + (choice >= i)
    return out


def minimize_de(problem: OptProblem, population: int = 40, F: float = 0.8, CR: float = 0.9,
                stall_iterations: int = 20, stall_tol: float = 1e-8) -> OptResult:
    """Minimise a single objective by DE/rand/1/bin.

    Mutant components that leave the box are bounced back to a random point
    between the base vector and the violated bound. The run stops when the
    budget is spent or the population mean fitness has stalled; the best
    member alone is a poor stall signal for DE/rand/1, whose best often
    sits unchanged for dozens of early generations.
    """
    require_objectives(problem, 1, "DE")
    rng = np.random.default_rng(problem.seed)
    evaluate = Evaluator(problem)
    d = problem.dim

    n = min(population, evaluate.remaining)
    if n < 4:
        raise ValueError("DE needs a population of at least 4 within the budget")
    pop = rng.random((n, d))
    fit = evaluate(pop)[:, 0]
    best = int(np.argmin(fit))
    trace = [float(fit[best])]
    mean_trace = [float(fit.mean())]

    while evaluate.remaining > 0 and not stagnated(mean_trace, stall_iterations, stall_tol):
        idx = _distinct_triples(rng, n)
        base, a, b = pop[idx[:, 0]], pop[idx[:, 1]], pop[idx[:, 2]]
        mutant = base + F * (a - b)
        r = rng.random((n, d))
        mutant = np.where(mutant < 0.0, r * base, mutant)
        mutant = np.where(mutant > 1.0, base + r * (1.0 - base), mutant)
        cross = rng.random((n, d)) < CR
        cross[np.arange(n), rng.integers(0, d, n)] = True
        trial = np.where(cross, mutant, pop)

        k = min(n, evaluate.remaining)
        trial_fit = np.full(n, np.inf)
        trial_fit[:k] = evaluate(trial[:k])[:, 0]
        accept = trial_fit <= fit
        pop[accept], fit[accept] = trial[accept], trial_fit[accept]
        best = int(np.argmin(fit))
        trace.append(float(fit[best]))
        mean_trace.append(float(np.mean(fit)) if np.all(np.isfinite(fit)) else np.inf)

    return OptResult(problem.to_full(pop[best])[0], float(fit[best]), evaluate.count, tuple(trace))
