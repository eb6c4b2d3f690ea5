"""Contingency and probability tables.

All downstream code works on :class:`ProbabilityTable`.  Cells are always
vectorized in row-major order ``(p11, p12, ..., p1c, p21, ..., prc)``; the
gradient indexing in :mod:`latcorr.inference` relies on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DegenerateMarginsError,
    DimensionMismatchError,
    EmptyTableError,
    NegativeCountError,
    NonRectangularError,
)

PROB_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _as_grid(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        grid = values
    else:
        rows = list(values)
        if rows and any(np.ndim(row) != 1 for row in rows):
            raise NonRectangularError("table rows must be one-dimensional sequences")
        lengths = {len(row) for row in rows}
        if len(lengths) > 1:
            raise NonRectangularError(f"rows have differing lengths {sorted(lengths)}")
        grid = np.asarray(rows)
    if grid.ndim != 2:
        raise NonRectangularError(f"expected a 2-D grid, got {grid.ndim} dimension(s)")
    return grid


@dataclass(frozen=True)
class ContingencyTable:
    """Observed counts of an ``r x c`` cross-classification."""

    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", _frozen(np.asarray(self.counts, dtype=np.int64)))

    @property
    def r(self) -> int:
        return self.counts.shape[0]

    @property
    def c(self) -> int:
        return self.counts.shape[1]

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def to_probabilities(self) -> ProbabilityTable:
        return to_probabilities(self)


@dataclass(frozen=True)
class ProbabilityTable:
    """Cell probabilities with their margins.

    ``dropped_rows`` / ``dropped_cols`` hold the original indices of empty
    lines that were removed before normalization.
    """

    p: np.ndarray
    row_margins: np.ndarray = field(init=False)
    col_margins: np.ndarray = field(init=False)
    dropped_rows: tuple[int, ...] = ()
    dropped_cols: tuple[int, ...] = ()

    def __post_init__(self):
        p = _frozen(np.asarray(self.p, dtype=float))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "row_margins", _frozen(p.sum(axis=1)))
        object.__setattr__(self, "col_margins", _frozen(p.sum(axis=0)))

    @property
    def r(self) -> int:
        return self.p.shape[0]

    @property
    def c(self) -> int:
        return self.p.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    @property
    def collapsed(self) -> bool:
        return bool(self.dropped_rows or self.dropped_cols)

    @property
    def independence(self) -> np.ndarray:
        """Outer product of the margins, ``p_i. * p_.j``."""
        return np.outer(self.row_margins, self.col_margins)

    def flatten(self) -> np.ndarray:
        return flatten(self)

    def transpose(self) -> ProbabilityTable:
        return ProbabilityTable(self.p.T)


def from_counts(counts) -> ContingencyTable:
    """Validate a grid of counts and wrap it.

    Raises
    ------
    NonRectangularError, NegativeCountError, EmptyTableError
        For ragged input, negative or non-integer entries, or an all-zero grid.
    DegenerateMarginsError
        When fewer than two non-empty rows or columns remain.
    """
    if isinstance(counts, ContingencyTable):
        return counts
    grid = _as_grid(counts)
    if grid.dtype.kind not in "iuf" and grid.dtype != bool:
        try:
            grid = grid.astype(float)
        except (TypeError, ValueError) as exc:
            raise NegativeCountError("counts must be numeric") from exc
    grid = grid.astype(float)
    if not np.all(np.isfinite(grid)):
        raise NegativeCountError("counts must be finite")
    if np.any(grid < 0):
        raise NegativeCountError("counts must be nonnegative")
    if np.any(grid != np.round(grid)):
        raise NegativeCountError("counts must be integers")
    if grid.sum() <= 0:
        raise EmptyTableError("table has no positive count")
    kept_r = int(np.count_nonzero(grid.sum(axis=1)))
    kept_c = int(np.count_nonzero(grid.sum(axis=0)))
    if kept_r < 2 or kept_c < 2:
        raise DegenerateMarginsError(
            f"need at least two non-empty rows and columns, got {kept_r}x{kept_c}"
        )
    return ContingencyTable(grid.astype(np.int64))


def _collapse(grid: np.ndarray) -> tuple[np.ndarray, tuple[int, ...], tuple[int, ...]]:
    row_keep = grid.sum(axis=1) > 0
    col_keep = grid.sum(axis=0) > 0
    dropped_rows = tuple(int(i) for i in np.flatnonzero(~row_keep))
    dropped_cols = tuple(int(j) for j in np.flatnonzero(~col_keep))
    if dropped_rows or dropped_cols:
        grid = grid[row_keep][:, col_keep]
    return grid, dropped_rows, dropped_cols


def to_probabilities(table: ContingencyTable) -> ProbabilityTable:
    """Relative frequencies ``n_ij / n`` after dropping empty rows and columns."""
    grid, dr, dc = _collapse(np.asarray(table.counts))
    return ProbabilityTable(grid / table.n, dropped_rows=dr, dropped_cols=dc)


def from_probabilities(p, tol: float = PROB_TOL) -> ProbabilityTable:
    """Validate an externally supplied probability grid.

    The total must be within ``tol`` of one; empty lines are collapsed.
    """
    if isinstance(p, ProbabilityTable):
        return p
    grid = _as_grid(p).astype(float)
    if not np.all(np.isfinite(grid)) or np.any(grid < 0):
        raise NegativeCountError("probabilities must be finite and nonnegative")
    total = grid.sum()
    if total <= 0:
        raise EmptyTableError("probability table has no positive mass")
    if abs(total - 1.0) > tol:
        raise DimensionMismatchError(f"probabilities sum to {total!r}, not 1 within {tol}")
    grid, dr, dc = _collapse(grid)
    if grid.shape[0] < 2 or grid.shape[1] < 2:
        raise DegenerateMarginsError("need at least two non-empty rows and columns")
    return ProbabilityTable(grid, dropped_rows=dr, dropped_cols=dc)


def flatten(pt: ProbabilityTable) -> np.ndarray:
    return np.asarray(pt.p).reshape(-1).copy()


def unflatten(v, r: int, c: int) -> ProbabilityTable:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != r * c:
        raise DimensionMismatchError(f"vector of length {v.size} cannot fill a {r}x{c} table")
    return ProbabilityTable(v.reshape(r, c))


def crosstab(x, y) -> tuple[ContingencyTable, np.ndarray, np.ndarray]:
    """Cross-tabulate two label vectors.

    Categories are ordered by ``np.unique``, so ordinal codes keep their order.
    Returns the table and the row and column category labels.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 1 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatchError("x and y must be 1-D arrays of equal length")
    xs, xi = np.unique(x, return_inverse=True)
    ys, yi = np.unique(y, return_inverse=True)
    counts = np.zeros((xs.size, ys.size), dtype=np.int64)
    np.add.at(counts, (xi, yi), 1)
    return from_counts(counts), xs, ys


def check_table(X, kind: str = "auto") -> tuple[ProbabilityTable, int | None]:
    """Coerce user input into a probability table plus sample size.

    Parameters
    ----------
    X : ContingencyTable, ProbabilityTable or array-like
        Counts or cell probabilities.
    kind : {"auto", "counts", "probabilities"}
        With ``"auto"`` an integer-valued grid is read as counts and anything
        else as probabilities.

    Returns
    -------
    (ProbabilityTable, n)
        ``n`` is ``None`` for probability input.
    """
    if isinstance(X, ProbabilityTable):
        return X, None
    if isinstance(X, ContingencyTable):
        return to_probabilities(X), X.n
    if kind not in ("auto", "counts", "probabilities"):
        raise ValueError(f"unknown table kind {kind!r}")
    grid = _as_grid(X)
    if kind == "auto":
        g = np.asarray(grid, dtype=float)
        kind = "counts" if np.all(np.isfinite(g)) and np.all(g == np.round(g)) else "probabilities"
    if kind == "counts":
        table = from_counts(grid)
        return to_probabilities(table), table.n
    return from_probabilities(grid), None
