"""Global-best particle swarm optimisation (constriction coefficients)."""

from __future__ import annotations

import numpy as np

from .problem import Evaluator, OptProblem, OptResult, require_objectives, stagnated


def _reflect(x: np.ndarray, v: np.ndarray):
    """Mirror coordinates that left [0, 1] back into the box and reverse their velocity."""
    for _ in range(4):
        low, high = x < 0.0, x > 1.0
        if not (low.any() or high.any()):
            break
        x = np.where(low, -x, np.where(high, 2.0 - x, x))
        v = np.where(low | high, -v, v)
    return np.clip(x, 0.0, 1.0), v


def minimize_pso(problem: OptProblem, particles: int = 25, inertia: float = 0.729,
                 cognitive: float = 1.494, social: float = 1.494, vmax: float = 0.5,
                 stall_iterations: int = 20, stall_tol: float = 1e-8) -> OptResult:
    """Minimise a single objective with a global-best particle swarm.

    Velocities are clamped to ``vmax`` times the range of each free feature
    and particles leaving the box are reflected back into it.
    """
    require_objectives(problem, 1, "PSO")
    rng = np.random.default_rng(problem.seed)
    evaluate = Evaluator(problem)
    d = problem.dim

    n = min(particles, evaluate.remaining)
    x = rng.random((n, d))
    v = rng.uniform(-vmax, vmax, (n, d))
    f = evaluate(x)[:, 0]
    pbest, pbest_f = x.copy(), f.copy()
    g = int(np.argmin(pbest_f))
    gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
    trace = [gbest_f]

    while evaluate.remaining > 0 and not stagnated(trace, stall_iterations, stall_tol):
        r1, r2 = rng.random((n, d)), rng.random((n, d))
        v = inertia * v + cognitive * r1 * (pbest - x) + social * r2 * (gbest - x)
        v = np.clip(v, -vmax, vmax)
        x, v = _reflect(x + v, v)
        k = min(n, evaluate.remaining)
        f = np.full(n, np.inf)
        f[:k] = evaluate(x[:k])[:, 0]
        better = f < pbest_f
        pbest[better], pbest_f[better] = x[better], f[better]
        g = int(np.argmin(pbest_f))
        if pbest_f[g] < gbest_f:
            gbest, gbest_f = pbest[g].copy(), float(pbest_f[g])
        trace.append(gbest_f)

    return OptResult(problem.to_full(gbest)[0], gbest_f, evaluate.count, tuple(trace))
