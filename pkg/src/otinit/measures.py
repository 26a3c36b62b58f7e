"""Discrete measures, cost matrices and the point-cloud text format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DiscreteMeasure",
    "CostMatrix",
    "MeasureError",
    "make_measure",
    "build_cost_sqeuclidean",
    "build_cost_1d",
    "read_point_clouds",
    "read_measure",
    "write_point_clouds",
]


class MeasureError(ValueError):
    """Raised when a measure or cost matrix cannot be constructed."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud ``sum_i a_i delta_{x_i}``.

    ``weights`` has shape ``(n,)`` and sums to one, ``support`` has shape
    ``(n, d)``. Use :func:`make_measure` to build one from raw weights.
    """

    weights: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        x = np.asarray(self.support, dtype=np.float64)
        if x.ndim == 1:
            x = x[:, None]
        if w.ndim != 1 or x.ndim != 2:
            raise MeasureError("weights must be 1D and support 2D")
        if x.shape[0] != w.shape[0]:
            raise MeasureError(
                f"support has {x.shape[0]} rows but weights has {w.shape[0]} entries"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(x))):
            raise MeasureError("weights and support must be finite")
        if np.any(w <= 0):
            raise MeasureError("zero or negative weight atoms are not allowed")
        if abs(w.sum() - 1.0) > 1e-9:
            raise MeasureError(f"weights sum to {w.sum()!r}, expected 1")
        w.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "support", x)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.support.shape[1]

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class CostMatrix:
    """Dense ``(n, m)`` ground cost matrix with a tag describing its origin."""

    values: np.ndarray
    kind: str = "custom_1d"

    def __post_init__(self):
        c = np.asarray(self.values, dtype=np.float64)
        if c.ndim != 2:
            raise MeasureError("cost matrix must be 2D")
        if not np.all(np.isfinite(c)):
            raise MeasureError("cost matrix entries must be finite")
        if self.kind not in ("squared_euclidean", "custom_1d"):
            raise MeasureError(f"unknown cost kind {self.kind!r}")
        c.setflags(write=False)
        object.__setattr__(self, "values", c)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def T(self) -> "CostMatrix":
        return CostMatrix(self.values.T, self.kind)


def make_measure(weights, support) -> DiscreteMeasure:
    """Build a :class:`DiscreteMeasure`, normalizing the weights.

    ``weights`` may be the string ``"uniform"`` or any nonnegative vector
    with positive total mass (raw counts are fine).
    """
    x = np.asarray(support, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if isinstance(weights, str):
        if weights != "uniform":
            raise MeasureError(f"unknown weight spec {weights!r}")
        return DiscreteMeasure(np.full(n, 1.0 / n), x)
    w = np.asarray(weights, dtype=np.float64)
    if np.any(np.isnan(w)):
        raise MeasureError("weights contain NaN")
    if np.any(w < 0):
        raise MeasureError("weights must be nonnegative")
    total = w.sum()
    if not np.isfinite(total) or total <= 0:
        raise MeasureError("weights must have positive finite total mass")
    return DiscreteMeasure(w / total, x)


def build_cost_sqeuclidean(X, Y) -> CostMatrix:
    """Pairwise squared Euclidean distances ``||x_i - y_j||^2``."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[1] != Y.shape[1]:
        raise MeasureError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    # explicit differences: exact zeros on coincident points, no cancellation
    diff = X[:, None, :] - Y[None, :, :]
    values = np.einsum("ijk,ijk->ij", diff, diff)
    return CostMatrix(values, "squared_euclidean")


def build_cost_1d(x, y, cost=None) -> CostMatrix:
    """Cost matrix between two 1D supports for a scalar cost ``c(x, y)``.

    ``cost`` must be vectorized; the default is the squared difference.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if cost is None:
        return CostMatrix((x[:, None] - y[None, :]) ** 2, "squared_euclidean")
    return CostMatrix(cost(x[:, None], y[None, :]), "custom_1d")


def _data_lines(text: str):
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            yield line


def read_point_clouds(path) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Read a ``(mu, nu)`` pair from the whitespace point-cloud format.

    Layout: a header ``n m d``, then ``n`` rows ``weight x_1 .. x_d`` for mu
    and ``m`` rows for nu. Lines starting with ``#`` are ignored.
    """
    lines = list(_data_lines(Path(path).read_text()))
    if not lines:
        raise MeasureError(f"{path}: empty file")
    try:
        n, m, d = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise MeasureError(f"{path}: bad header {lines[0]!r}") from exc
    rows = lines[1:]
    if len(rows) != n + m:
        raise MeasureError(f"{path}: expected {n + m} data rows, found {len(rows)}")
    try:
        data = np.array([[float(t) for t in r.split()] for r in rows])
    except ValueError as exc:
        raise MeasureError(f"{path}: non-numeric entry") from exc
    if data.ndim != 2 or data.shape[1] != d + 1:
        raise MeasureError(f"{path}: every row must hold 1 + {d} numbers")
    mu = make_measure(data[:n, 0], data[:n, 1:])
    nu = make_measure(data[n:, 0], data[n:, 1:])
    return mu, nu


def read_measure(path) -> DiscreteMeasure:
    """Read one measure (header ``n d``); a paired file yields its first measure."""
    lines = list(_data_lines(Path(path).read_text()))
    if not lines:
        raise MeasureError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) == 3:
        mu, _ = read_point_clouds(path)
        return mu
    try:
        n, d = (int(t) for t in header)
        data = np.array([[float(t) for t in r.split()] for r in lines[1:]])
    except ValueError as exc:
        raise MeasureError(f"{path}: malformed measure file") from exc
    if data.shape != (n, d + 1):
        raise MeasureError(f"{path}: expected {n} rows of 1 + {d} numbers")
    return make_measure(data[:, 0], data[:, 1:])


def write_point_clouds(path, mu: DiscreteMeasure, nu: DiscreteMeasure | None = None):
    """Write one or two measures in the point-cloud text format."""
    with open(path, "w") as fh:
        if nu is None:
            fh.write(f"{mu.n} {mu.dim}\n")
            blocks = [mu]
        else:
            if mu.dim != nu.dim:
                raise MeasureError("measures live in different dimensions")
            fh.write(f"{mu.n} {nu.n} {mu.dim}\n")
            blocks = [mu, nu]
        for meas in blocks:
            for w, x in zip(meas.weights, meas.support):
                fh.write(" ".join(repr(float(v)) for v in (w, *x)) + "\n")
