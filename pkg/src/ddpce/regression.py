"""Regression solvers for PCE coefficients.

Three routes are provided: ordinary least squares through a QR
factorisation, hybrid least-angle regression (LAR path, then OLS on the
selected support), and a sparse-adaptive builder that grows a lower
multi-index set until the design matrix becomes ill-conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq, solve_triangular, svdvals

from .basis import MultiIndexSet, PceModel, eval_basis, legendre_table
from .features import DEFAULT_SPECS, Dataset, scale_to_canonical


class UnderdeterminedError(ValueError):
    """Fewer samples than basis terms; use :func:`fit_lar` instead."""


class ConditioningError(ValueError):
    """The design matrix is (numerically) rank deficient."""


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class FitReport:
    solver: str
    condition_number: float
    active_terms: int
    residual_norm: float
    degenerate: bool = False
    loo_error: float | None = None


def build_design_matrix(basis: MultiIndexSet, points, specs=DEFAULT_SPECS) -> np.ndarray:
    """Matrix ``D[m, k] = Psi_k(x(y_m))``; the first column is the constant term."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise ValueError("no points")
    return eval_basis(basis, scale_to_canonical(pts, specs))


def condition_number(D) -> float:
    """Spectral condition number; ``inf`` when the smallest singular value is numerically 0."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    if D.shape[0] < D.shape[1]:
        raise ValueError("condition number needs at least as many rows as columns")
    s = svdvals(D)
    # numerically zero: below the rank tolerance used by matrix_rank
    if s[-1] <= s[0] * max(D.shape) * np.finfo(float).eps:
        return float("inf")
    return float(s[0] / s[-1])


def _rank_deficient(R: np.ndarray) -> bool:
    d = np.abs(np.diag(R))
    return d.min() <= d.max() * max(R.shape) * np.finfo(float).eps * 10


def _ols_qr(D: np.ndarray, b: np.ndarray):
    Q, R = np.linalg.qr(D, mode="reduced")
    if _rank_deficient(R):
        raise ConditioningError("design matrix is rank deficient")
    coef = solve_triangular(R, Q.T @ b)
    return coef, Q, R


def fit_ols(basis: MultiIndexSet, dataset: Dataset, specs=DEFAULT_SPECS) -> tuple[PceModel, FitReport]:
    """Least-squares PCE coefficients via a thin QR factorisation of the design matrix."""
    M, K = len(dataset), len(basis)
    if M <= K:
        raise UnderdeterminedError(f"M={M} samples <= K={K} terms; use fit_lar for underdetermined problems")
    D = build_design_matrix(basis, dataset.points, specs)
    b = dataset.responses
    coef, _, R = _ols_qr(D, b)
    s = svdvals(R)
    report = FitReport(
        solver="ols-qr",
        condition_number=float(s[0] / s[-1]),
        active_terms=int(np.count_nonzero(coef)),
        residual_norm=float(np.linalg.norm(D @ coef - b)),
    )
    model = PceModel(basis, coef, specs, {"builder": "ols-qr", "training_size": M})
    return model, report


def lar_path(X: np.ndarray, y: np.ndarray, max_steps: int) -> list[list[int]]:
    """Active sets visited by least-angle regression.

    ``X`` columns must be centred and scaled to unit norm and ``y`` centred.
    Returns the active set after each step (step ``k`` has ``k+1`` columns).
    """
    n, p = X.shape
    active: list[int] = []
    signs: list[float] = []
    inactive = np.ones(p, dtype=bool)
    mu = np.zeros(n)
    path = []
    tiny = np.finfo(float).eps * 100
    scale = max(float(np.abs(X.T @ y).max()), tiny) if p else tiny
    for _ in range(min(max_steps, p, n - 1)):
        c = X.T @ (y - mu)
        cand = np.where(inactive, np.abs(c), -1.0)
        j = int(np.argmax(cand))
        C = cand[j]
        if C <= tiny * scale:
            break
        active.append(j)
        signs.append(np.sign(c[j]))
        inactive[j] = False
        XA = X[:, active] * np.array(signs)
        G = XA.T @ XA
        try:
            Ginv1 = np.linalg.solve(G, np.ones(len(active)))
        except np.linalg.LinAlgError:
            active.pop()
            break
        if not np.all(np.isfinite(Ginv1)) or Ginv1.sum() <= 0:
            active.pop()
            break
        AA = 1.0 / np.sqrt(Ginv1.sum())
        u = XA @ (AA * Ginv1)
        path.append(list(active))
        if not inactive.any():
            break
        a = X.T @ u
        ci, ai = c[inactive], a[inactive]
        with np.errstate(divide="ignore", invalid="ignore"):
            g = np.concatenate([(C - ci) / (AA - ai), (C + ci) / (AA + ai)])
        g = g[np.isfinite(g) & (g > tiny)]
        gamma = g.min() if g.size else C / AA
        mu = mu + min(gamma, C / AA) * u
    return path


def _loo_error(D: np.ndarray, b: np.ndarray) -> tuple[float, np.ndarray]:
    """Corrected leave-one-out error of an OLS fit, from the hat-matrix diagonal."""
    M, K = D.shape
    coef, Q, R = _ols_qr(D, b)
    h = np.einsum("ij,ij->i", Q, Q)
    resid = b - D @ coef
    if np.any(h >= 1.0 - 1e-12):
        return float("inf"), coef
    loo = np.mean((resid / (1.0 - h)) ** 2)
    Rinv = solve_triangular(R, np.eye(K))
    correction = M / (M - K) * (1.0 + np.sum(Rinv ** 2))
    return float(loo * correction), coef


def fit_lar(basis: MultiIndexSet, dataset: Dataset, max_active: int | None = None,
            specs=DEFAULT_SPECS) -> tuple[PceModel, FitReport]:
    """Sparse PCE by hybrid least-angle regression.

    The LAR path over the non-constant basis terms proposes nested supports;
    each support (plus the constant) is refitted by OLS and the one with the
    smallest corrected leave-one-out error is kept.

    Parameters
    ----------
    max_active : int, optional
        Largest number of nonzero terms including the constant.
        Defaults to ``min(M - 1, K)``.
    """
    M, K = len(dataset), len(basis)
    if M < 2:
        raise InsufficientDataError("LAR needs at least 2 samples")
    limit = min(M - 1, K)
    if max_active is None:
        max_active = limit
    if not 1 <= max_active <= limit:
        raise ValueError(f"max_active must lie in [1, {limit}], got {max_active}")
    D = build_design_matrix(basis, dataset.points, specs)
    b = dataset.responses
    zero = basis.position((0,) * basis.dim)
    others = np.array([k for k in range(K) if k != zero], dtype=int)

    b_mean = b.mean()
    degenerate = bool(np.all(b == b[0]))
    supports: list[list[int]] = [[]]
    if not degenerate and max_active > 1 and others.size:
        X = D[:, others] - D[:, others].mean(axis=0)
        norms = np.linalg.norm(X, axis=0)
        usable = norms > 1e-12 * np.sqrt(M)
        cols = np.flatnonzero(usable)
        Xn = X[:, cols] / norms[cols]
        for act in lar_path(Xn, b - b_mean, max_active - 1):
            supports.append(sorted(int(others[cols[j]]) for j in act))

    best = None
    for sup in supports:
        cols = [zero] + sup
        if len(cols) >= M:
            break
        try:
            err, coef = _loo_error(D[:, cols], b)
        except ConditioningError:
            break
        # numerically-equal errors favour the smaller support
        if best is None or err < best[0] - 1e-12 * max(best[0], np.mean(b ** 2) * 1e-12):
            best = (err, cols, coef)
    err, cols, coef_a = best
    coef = np.zeros(K)
    coef[cols] = coef_a
    s = svdvals(D[:, cols])
    report = FitReport(
        solver="lar-l1",
        condition_number=float(s[0] / s[-1]) if s[-1] > 0 else float("inf"),
        active_terms=int(np.count_nonzero(coef)) if not degenerate else 1,
        residual_norm=float(np.linalg.norm(D @ coef - b)),
        degenerate=degenerate,
        loo_error=err,
    )
    model = PceModel(basis, coef, specs, {"builder": "lar-l1", "training_size": M})
    return model, report


def _forward_neighbours(p: tuple[int, ...], members: set, cap: int):
    """Forward neighbours of ``p`` whose backward neighbours are all in ``members``."""
    out = []
    if sum(p) + 1 > cap:
        return out
    for n in range(len(p)):
        q = p[:n] + (p[n] + 1,) + p[n + 1:]
        if q in members:
            continue
        if all(q[:m] + (q[m] - 1,) + q[m + 1:] in members for m in range(len(q)) if q[m] > 0):
            out.append(q)
    return out


def _orthogonalise(Q: np.ndarray, d: np.ndarray):
    """Two passes of Gram-Schmidt of ``d`` against the orthonormal columns of ``Q``."""
    r = Q.T @ d
    w = d - Q @ r
    r2 = Q.T @ w
    w = w - Q @ r2
    return r + r2, w, float(np.linalg.norm(w))


def fit_sparse_adaptive(dataset: Dataset, max_total_degree: int = 6, cond_threshold: float = 10.0,
                        specs=DEFAULT_SPECS) -> tuple[PceModel, FitReport]:
    """Grow a lower multi-index set greedily while the design matrix stays well conditioned.

    Starting from the constant term, each iteration scores the admissible
    forward neighbours of the current set by their squared coefficient
    (their partial variance). When there are enough samples all candidates
    are fitted jointly with the current set; otherwise each candidate is
    fitted alone with it. The best candidate is admitted unless doing so
    would raise the condition number to ``cond_threshold`` or above, in
    which case the procedure stops. Final coefficients are an OLS fit on
    the accepted set.
    """
    M = len(dataset)
    if M < 10:
        raise InsufficientDataError(f"sparse-adaptive fit needs at least 10 samples, got {M}")
    if cond_threshold < 1.0:
        raise ValueError("cond_threshold must be >= 1")
    N = len(specs)
    x = scale_to_canonical(dataset.points, specs)
    b = dataset.responses
    table = legendre_table(max_total_degree, x)

    def column(p):
        col = np.ones(M)
        for n, d in enumerate(p):
            if d:
                col = col * table[d, :, n]
        return col

    zero = (0,) * N
    accepted = [zero]
    members = {zero}
    Q = np.ones((M, 1)) / np.sqrt(M)
    R = np.array([[np.sqrt(M)]])
    b_res = b - Q @ (Q.T @ b)

    cand: list[tuple[int, ...]] = []
    cand_cols: list[np.ndarray] = []  # candidate columns, orthogonalised against Q

    def add_candidates(ps):
        for p in ps:
            raw = column(p)
            _, w, _ = _orthogonalise(Q, raw)
            cand.append(p)
            cand_cols.append(w)

    add_candidates(_forward_neighbours(zero, members, max_total_degree))
    while cand:
        order = sorted(range(len(cand)), key=lambda i: (sum(cand[i]), tuple(-d for d in cand[i])))
        cand = [cand[i] for i in order]
        cand_cols = [cand_cols[i] for i in order]
        C = np.column_stack(cand_cols)
        if M > len(accepted) + len(cand):
            coef = lstsq(C, b_res, lapack_driver="gelsy", check_finite=False)[0]
        else:
            norms2 = np.einsum("ij,ij->j", C, C)
            with np.errstate(divide="ignore", invalid="ignore"):
                coef = np.where(norms2 > 0, (C.T @ b_res) / norms2, 0.0)
        score = coef ** 2
        k = int(np.argmax(score))
        p = cand[k]
        raw = column(p)
        r, w, rho = _orthogonalise(Q, raw)
        if rho <= np.finfo(float).eps * np.linalg.norm(raw) * M:
            break
        K = R.shape[0]
        R_new = np.zeros((K + 1, K + 1))
        R_new[:K, :K] = R
        R_new[:K, K] = r
        R_new[K, K] = rho
        s = svdvals(R_new)
        if not s[0] / s[-1] < cond_threshold:
            break
        q = w / rho
        Q = np.column_stack([Q, q])
        R = R_new
        accepted.append(p)
        members.add(p)
        b_res = b_res - q * (q @ b_res)
        del cand[k], cand_cols[k]
        cand_cols = [c - q * (q @ c) for c in cand_cols]
        add_candidates(_forward_neighbours(p, members, max_total_degree))

    # the final matrix is re-checked directly; drop trailing terms if rounding
    # pushed it over the threshold (the last admitted term is always maximal)
    while True:
        basis = MultiIndexSet(accepted)
        D = eval_basis(basis, x)
        cond = condition_number(D)
        if cond < cond_threshold or len(accepted) == 1:
            break
        accepted.pop()
    coef, _, _ = _ols_qr(D, b)
    report = FitReport(
        solver="sparse-adaptive",
        condition_number=cond,
        active_terms=int(np.count_nonzero(coef)),
        residual_norm=float(np.linalg.norm(D @ coef - b)),
    )
    model = PceModel(basis, coef, specs, {"builder": "sparse-adaptive", "training_size": M})
    return model, report

