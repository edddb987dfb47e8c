"""Orthonormal Legendre polynomial chaos bases and PCE models.

Multi-index sets are kept in graded lexicographic order: ascending total
degree, and within one degree the index with the larger leading degree
comes first, e.g. ``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .features import DEFAULT_SPECS, DomainError, FeatureSpec, scale_to_canonical

SCHEMA_VERSION = 1
DEFAULT_CAPACITY = 10**6


class CapacityError(ValueError):
    """A multi-index set would exceed the configured cardinality cap."""


class DegenerateModelError(ValueError):
    """The model has no variance, so sensitivity indices are undefined."""


def legendre_table(max_degree: int, x) -> np.ndarray:
    """Orthonormal Legendre values for all degrees ``0..max_degree``.

    Uses the three-term recurrence
    ``(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`` and scales by
    ``sqrt(2n+1)``, giving unit variance under the uniform density on [-1, 1].

    Returns
    -------
    ndarray, shape (max_degree + 1, *x.shape)
    """
    x = np.asarray(x, dtype=float)
    if max_degree < 0:
        raise ValueError("degree must be >= 0")
    if not np.all(np.abs(x) <= 1.0):
        raise DomainError("Legendre argument outside [-1, 1]")
    out = np.empty((max_degree + 1,) + x.shape)
    out[0] = 1.0
    if max_degree >= 1:
        out[1] = x
    for n in range(1, max_degree):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    out *= np.sqrt(2.0 * np.arange(max_degree + 1) + 1.0).reshape((-1,) + (1,) * x.ndim)
    return out


def legendre_orthonormal(degree: int, x):
    """Orthonormal Legendre polynomial ``sqrt(2p+1) P_p(x)``."""
    vals = legendre_table(degree, x)[degree]
    return float(vals) if np.ndim(vals) == 0 else vals


def _graded_key(p: tuple[int, ...]):
    return (sum(p), tuple(-d for d in p))


class MultiIndexSet:
    """Ordered, duplicate-free set of multi-indices containing the zero index.

    Parameters
    ----------
    indices : iterable of sequences of int
        Multi-indices, all of the same length. They are sorted into the
        canonical order on construction.
    """

    def __init__(self, indices: Iterable[Sequence[int]]):
        tuples = [tuple(int(d) for d in p) for p in indices]
        if not tuples:
            raise ValueError("multi-index set must be nonempty")
        dim = len(tuples[0])
        if any(len(p) != dim for p in tuples):
            raise ValueError("multi-indices of mixed length")
        if any(d < 0 for p in tuples for d in p):
            raise ValueError("negative polynomial degree")
        if len(set(tuples)) != len(tuples):
            raise ValueError("duplicate multi-index")
        if (0,) * dim not in tuples:
            raise ValueError("multi-index set must contain the zero index")
        tuples.sort(key=_graded_key)
        self._indices = tuple(tuples)
        self._array = np.array(tuples, dtype=np.int64).reshape(len(tuples), dim)
        self._array.setflags(write=False)
        self._lookup = {p: k for k, p in enumerate(tuples)}

    @property
    def dim(self) -> int:
        return self._array.shape[1]

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def indices(self) -> tuple[tuple[int, ...], ...]:
        return self._indices

    @property
    def max_degree(self) -> int:
        return int(self._array.max())

    def __len__(self) -> int:
        return len(self._indices)

    def __iter__(self):
        return iter(self._indices)

    def __contains__(self, p) -> bool:
        return tuple(p) in self._lookup

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndexSet) and self._indices == other._indices

    def __hash__(self):
        return hash(self._indices)

    def __repr__(self) -> str:
        return f"MultiIndexSet(dim={self.dim}, size={len(self)})"

    def position(self, p) -> int:
        return self._lookup[tuple(p)]

    def issubset(self, other: "MultiIndexSet") -> bool:
        return all(p in other for p in self._indices)

    def is_lower(self) -> bool:
        """True if every backward neighbour of every member is a member."""
        for p in self._indices:
            for n, d in enumerate(p):
                if d > 0 and p[:n] + (d - 1,) + p[n + 1:] not in self._lookup:
                    return False
        return True


def _check_capacity(count: int, capacity: int):
    if count > capacity:
        raise CapacityError(f"multi-index set of size {count} exceeds capacity {capacity}")


def _downward_enumerate(dim: int, admissible):
    """Depth-first enumeration of a downward-closed set given a membership test."""
    out = []
    p = [0] * dim

    def rec(n):
        if n == dim:
            out.append(tuple(p))
            return
        d = 0
        while True:
            p[n] = d
            if not admissible(p, n):
                break
            rec(n + 1)
            d += 1
        p[n] = 0

    rec(0)
    return out


def tensor_product_set(N: int, P: int, capacity: int = DEFAULT_CAPACITY) -> MultiIndexSet:
    """All multi-indices with ``max_n p_n <= P``; ``(P+1)**N`` members."""
    if N < 1 or P < 0:
        raise ValueError("need N >= 1 and P >= 0")
    _check_capacity((P + 1) ** N, capacity)
    return MultiIndexSet(_downward_enumerate(N, lambda p, n: p[n] <= P))


def total_degree_set(N: int, P: int, capacity: int = DEFAULT_CAPACITY) -> MultiIndexSet:
    """All multi-indices with ``sum_n p_n <= P``; ``C(N+P, P)`` members."""
    if N < 1 or P < 0:
        raise ValueError("need N >= 1 and P >= 0")
    _check_capacity(math.comb(N + P, P), capacity)
    return MultiIndexSet(_downward_enumerate(N, lambda p, n: sum(p[: n + 1]) <= P))


def hyperbolic_set(N: int, P: int, q: float, capacity: int = DEFAULT_CAPACITY) -> MultiIndexSet:
    """All multi-indices with ``(sum_n p_n**q)**(1/q) <= P``, for ``0 < q <= 1``.

    ``q = 1`` gives the total-degree set.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"q must lie in (0, 1], got {q}")
    if N < 1 or P < 0:
        raise ValueError("need N >= 1 and P >= 0")
    # small slack so that boundary members such as (P,0,...) survive rounding
    bound = P ** q * (1.0 + 1e-12)

    def admissible(p, n):
        return sum(float(d) ** q for d in p[: n + 1] if d) <= bound

    found = _downward_enumerate(N, admissible)
    _check_capacity(len(found), capacity)
    return MultiIndexSet(found)


def make_basis(kind: str, N: int, P: int, q: float = 1.0, capacity: int = DEFAULT_CAPACITY) -> MultiIndexSet:
    if kind == "tensor-product":
        return tensor_product_set(N, P, capacity)
    if kind == "total-degree":
        return total_degree_set(N, P, capacity)
    if kind == "hyperbolic":
        return hyperbolic_set(N, P, q, capacity)
    raise ValueError(f"unknown basis kind {kind!r}")


def eval_basis(basis: MultiIndexSet, x) -> np.ndarray:
    """Evaluate every multivariate basis polynomial at canonical point(s).

    Parameters
    ----------
    basis : MultiIndexSet
    x : array_like, shape (N,) or (n, N)
        Canonical coordinates in [-1, 1].

    Returns
    -------
    ndarray, shape (K,) or (n, K)
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.shape[1] != basis.dim:
        raise ValueError(f"point has {x2.shape[1]} coordinates, basis has dimension {basis.dim}")
    table = legendre_table(basis.max_degree, x2)  # (P+1, n, N)
    alpha = basis.array
    out = np.ones((x2.shape[0], len(basis)))
    for n in range(basis.dim):
        degrees = alpha[:, n]
        if degrees.any():
            out *= table[degrees, :, n].T
    return out[0] if single else out


@dataclass(frozen=True, eq=False)
class PceModel:
    """A trained polynomial chaos surrogate ``sum_k s_k Psi_k(x(y))``."""

    basis: MultiIndexSet
    coefficients: np.ndarray
    specs: tuple[FeatureSpec, ...] = DEFAULT_SPECS
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=float).reshape(-1)
        if coef.shape[0] != len(self.basis):
            raise ValueError(f"{coef.shape[0]} coefficients for a basis of size {len(self.basis)}")
        if not np.all(np.isfinite(coef)):
            raise ValueError("non-finite PCE coefficient")
        if len(self.specs) != self.basis.dim:
            raise ValueError("feature specs do not match basis dimension")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "specs", tuple(self.specs))

    @property
    def active_terms(self) -> int:
        return int(np.count_nonzero(self.coefficients))

    @property
    def mean(self) -> float:
        return float(self.coefficients[self.basis.position((0,) * self.basis.dim)])

    @property
    def variance(self) -> float:
        zero = self.basis.position((0,) * self.basis.dim)
        c = np.delete(self.coefficients, zero)
        return float(c @ c)

    def predict(self, points) -> np.ndarray | float:
        """Predict at design point(s) in physical units."""
        x = scale_to_canonical(points, self.specs)
        vals = eval_basis(self.basis, np.atleast_2d(x)) @ self.coefficients
        return float(vals[0]) if np.ndim(points) == 1 else vals

    __call__ = predict

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "features": [
                {"name": s.name, "column": s.column, "unit": s.unit, "lower": s.lower, "upper": s.upper, "kind": s.kind}
                for s in self.specs
            ],
            "multi_indices": [list(p) for p in self.basis],
            "coefficients": [float(c) for c in self.coefficients],
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PceModel":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported model schema version {doc.get('schema_version')!r}")
        specs = tuple(FeatureSpec(**f) for f in doc["features"])
        basis = MultiIndexSet(doc["multi_indices"])
        if list(basis) != [tuple(p) for p in doc["multi_indices"]]:
            raise ValueError("multi-indices are not in canonical order")
        return cls(basis, np.array(doc["coefficients"], dtype=float), specs, doc.get("provenance", {}))

    def save(self, path) -> None:
        # float repr is the shortest string that round-trips bit for bit
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "PceModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def eval_model(model: PceModel, points):
    return model.predict(points)


@dataclass(frozen=True)
class SobolIndices:
    first: np.ndarray
    total: np.ndarray
    variance: float


def sobol_indices(model: PceModel) -> SobolIndices:
    """First-order and total Sobol indices from the PCE coefficients.

    With an orthonormal basis the variance of the expansion is the sum of
    squared non-constant coefficients, and each term's share is attributed
    to the features in which it has nonzero degree.
    """
    alpha = model.basis.array
    sq = model.coefficients ** 2
    nonconst = alpha.sum(axis=1) > 0
    var = float(sq[nonconst].sum())
    if var == 0.0:
        raise DegenerateModelError("model variance is zero; Sobol indices undefined")
    involved = alpha > 0
    only = involved & (involved.sum(axis=1, keepdims=True) == 1)
    first = (sq[:, None] * only).sum(axis=0) / var
    total = (sq[:, None] * involved).sum(axis=0) / var
    return SobolIndices(first, total, var)
