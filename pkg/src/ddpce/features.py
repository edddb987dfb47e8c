"""Design feature space: bounds, canonical scaling, sampling and CSV I/O.

A design point is a length-9 float vector ordered as
``(l, g_f, w_f, h_f, h_b, N_f, v, T_a, P)``. Batches of points are
``(n, 9)`` arrays; every function here accepts either shape.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class BoundsError(ValueError):
    """A design feature lies outside its admissible interval."""


class DomainError(ValueError):
    """A canonical coordinate lies outside [-1, 1]."""


class ParseError(ValueError):
    """A dataset file could not be parsed."""


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    column: str
    unit: str
    lower: float
    upper: float
    kind: str = "continuous"

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower={self.lower} must be < upper={self.upper}")
        if self.kind not in ("continuous", "integer"):
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)


DEFAULT_SPECS: tuple[FeatureSpec, ...] = (
    FeatureSpec("l", "l_mm", "mm", 50.0, 200.0),
    FeatureSpec("g_f", "gf_mm", "mm", 3.0, 8.0),
    FeatureSpec("w_f", "wf_mm", "mm", 1.4, 4.0),
    FeatureSpec("h_f", "hf_mm", "mm", 16.0, 45.0),
    FeatureSpec("h_b", "hb_mm", "mm", 4.0, 15.0),
    FeatureSpec("N_f", "Nf", "-", 5.0, 25.0, kind="integer"),
    FeatureSpec("v", "v_mps", "m/s", 1.0, 5.0),
    FeatureSpec("T_a", "Ta_C", "degC", 25.0, 45.0),
    FeatureSpec("P", "P_W", "W", 115.0, 140.0),
)

FEATURE_NAMES = tuple(s.name for s in DEFAULT_SPECS)
RESPONSE_COLUMN = "Ts_C"
CSV_HEADER = tuple(s.column for s in DEFAULT_SPECS) + (RESPONSE_COLUMN,)


def feature_index(name: str, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> int:
    """Position of a feature, looked up by name (``"v"``) or CSV column (``"v_mps"``)."""
    for i, s in enumerate(specs):
        if name in (s.name, s.column):
            return i
    raise KeyError(f"unknown feature {name!r}")


def bounds_arrays(specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> tuple[np.ndarray, np.ndarray]:
    lower = np.array([s.lower for s in specs], dtype=float)
    upper = np.array([s.upper for s in specs], dtype=float)
    return lower, upper


def check_bounds(points, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> np.ndarray:
    """Return ``points`` as a float array, raising :class:`BoundsError` on violations."""
    y = np.asarray(points, dtype=float)
    if y.shape[-1] != len(specs):
        raise ValueError(f"expected {len(specs)} features, got shape {y.shape}")
    lower, upper = bounds_arrays(specs)
    bad = ~((y >= lower) & (y <= upper))
    if bad.any():
        idx = np.argwhere(bad)[0]
        j = idx[-1]
        value = y[tuple(idx)]
        s = specs[j]
        raise BoundsError(f"feature {s.name} = {value!r} outside [{s.lower}, {s.upper}] {s.unit}")
    return y


def scale_to_canonical(points, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> np.ndarray:
    """Affine map of each feature interval onto [-1, 1]."""
    y = check_bounds(points, specs)
    lower, upper = bounds_arrays(specs)
    return 2.0 * (y - lower) / (upper - lower) - 1.0


def unscale_from_canonical(x, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> np.ndarray:
    """Inverse of :func:`scale_to_canonical`."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(specs):
        raise ValueError(f"expected {len(specs)} coordinates, got shape {x.shape}")
    if not np.all(np.abs(x) <= 1.0):
        j = np.argwhere(~(np.abs(x) <= 1.0))[0][-1]
        raise DomainError(f"canonical coordinate for {specs[j].name} outside [-1, 1]")
    lower, upper = bounds_arrays(specs)
    y = lower + 0.5 * (x + 1.0) * (upper - lower)
    # guard against one-ulp overshoot at the interval ends
    return np.clip(y, lower, upper)


def round_integer_features(points, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> np.ndarray:
    """Round integer-valued features (N_f) to the nearest admissible integer."""
    y = np.array(points, dtype=float, copy=True)
    for j, s in enumerate(specs):
        if s.kind == "integer":
            y[..., j] = np.clip(np.rint(y[..., j]), np.ceil(s.lower), np.floor(s.upper))
    return y


def sample_uniform(n: int, specs: Sequence[FeatureSpec] = DEFAULT_SPECS, seed: int = 0) -> np.ndarray:
    """Draw ``n`` i.i.d. uniform design points; integer features are rounded.

    Returns
    -------
    ndarray, shape (n, 9)
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    lower, upper = bounds_arrays(specs)
    y = lower + (upper - lower) * rng.random((n, len(specs)))
    return round_integer_features(y, specs)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design points with their measured/simulated heat-sink temperatures."""

    points: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        resp = np.atleast_1d(np.asarray(self.responses, dtype=float))
        if len(pts) < 1 or len(pts) != len(resp):
            raise ValueError(f"points ({len(pts)}) and responses ({len(resp)}) must have equal length >= 1")
        seen: dict[bytes, float] = {}
        for p, r in zip(pts, resp):
            key = p.tobytes()
            if key in seen and seen[key] != r:
                raise ValueError(f"conflicting responses for identical design point {p.tolist()}")
            seen[key] = r
        pts.setflags(write=False)
        resp.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "responses", resp)

    def __len__(self) -> int:
        return len(self.responses)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(self.responses, other.responses)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.points[idx], self.responses[idx])


def _format(value: float) -> str:
    return repr(float(value))


def save_csv(ds: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for p, r in zip(ds.points, ds.responses):
            writer.writerow([_format(v) for v in p] + [_format(r)])


def _read_rows(path, specs, require_response: bool):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such dataset file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        feature_cols = [s.column for s in specs]
        missing = [c for c in feature_cols if c not in header]
        if require_response and RESPONSE_COLUMN not in header:
            missing.append(RESPONSE_COLUMN)
        if missing:
            raise ParseError(f"{path}: header missing column(s) {', '.join(missing)}")
        unknown = [c for c in header if c not in feature_cols and c != RESPONSE_COLUMN]
        if unknown:
            raise ParseError(f"{path}: unknown column(s) {', '.join(unknown)}")
        pos = [header.index(c) for c in feature_cols]
        rpos = header.index(RESPONSE_COLUMN) if RESPONSE_COLUMN in header else None
        points, responses = [], []
        for rowno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: row {rowno}: expected {len(header)} cells, got {len(row)}")
            values = []
            for j, col in zip(pos, feature_cols):
                try:
                    values.append(float(row[j]))
                except ValueError:
                    raise ParseError(f"{path}: row {rowno}, column {col}: non-numeric cell {row[j]!r}") from None
            for s, val in zip(specs, values):
                if not (s.lower <= val <= s.upper):
                    raise ParseError(
                        f"{path}: row {rowno}, column {s.column}: {val!r} outside [{s.lower}, {s.upper}]"
                    )
            points.append(values)
            if rpos is not None:
                try:
                    responses.append(float(row[rpos]))
                except ValueError:
                    raise ParseError(
                        f"{path}: row {rowno}, column {RESPONSE_COLUMN}: non-numeric cell {row[rpos]!r}"
                    ) from None
    if not points:
        raise ParseError(f"{path}: no data rows")
    return np.array(points, dtype=float), (np.array(responses, dtype=float) if rpos is not None else None)


def load_csv(path, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> Dataset:
    """Read a labelled dataset; rows violating the feature bounds are rejected."""
    points, responses = _read_rows(path, specs, require_response=True)
    try:
        return Dataset(points, responses)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def load_points(path, specs: Sequence[FeatureSpec] = DEFAULT_SPECS) -> tuple[np.ndarray, np.ndarray | None]:
    """Read design points for prediction; the ``Ts_C`` column is optional."""
    return _read_rows(path, specs, require_response=False)
