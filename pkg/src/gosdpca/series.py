"""Aligned panel container: one target series plus many predictor series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class SeriesMatrix:
    """An n-by-k panel of aligned time series with named columns.

    ``values[t, j]`` is the observation of column ``j`` at time index ``t``
    (row 0 is the earliest observation). One column plays the role of the
    forecast target; the rest are predictors. The optional ``index`` holds
    time labels carried through from a data file.
    """

    values: np.ndarray
    columns: tuple[str, ...]
    index: tuple[str, ...] | None = field(default=None)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2:
            raise InputError("series values must be a 2-D array")
        if vals.shape[1] != len(self.columns):
            raise InputError(
                f"{vals.shape[1]} columns of data but {len(self.columns)} names"
            )
        if len(set(self.columns)) != len(self.columns):
            raise InputError("duplicate column names")
        if not np.all(np.isfinite(vals)):
            raise InputError("series values must be finite")
        if self.index is not None and len(self.index) != vals.shape[0]:
            raise InputError("index length does not match row count")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column_position(self, column: int | str) -> int:
        """Resolve a column given by name or integer position."""
        if isinstance(column, str):
            try:
                return self.columns.index(column)
            except ValueError:
                raise InputError(f"unknown column {column!r}") from None
        j = int(column)
        if not 0 <= j < self.n_cols:
            raise InputError(f"column index {j} out of range")
        return j

    def target_and_predictors(
        self, target: int | str
    ) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
        """Split into the target vector and the predictor panel.

        Returns ``(y, x, predictor_names)`` where ``y`` has shape (n,) and
        ``x`` has shape (n, k - 1), predictors in their original column order.
        """
        j = self.column_position(target)
        keep = [i for i in range(self.n_cols) if i != j]
        y = self.values[:, j].copy()
        x = self.values[:, keep].copy()
        names = tuple(self.columns[i] for i in keep)
        return y, x, names

    def head(self, n: int) -> "SeriesMatrix":
        """First ``n`` rows as a new panel."""
        idx = None if self.index is None else self.index[:n]
        return SeriesMatrix(self.values[:n].copy(), self.columns, idx)
