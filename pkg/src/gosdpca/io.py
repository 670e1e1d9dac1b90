"""CSV ingestion with per-column stationarity transforms, and CSV export.

Data files are UTF-8 comma-separated with a header row and plain decimal
reals. Transform codes follow the common 1-7 convention:

1 level, 2 first difference, 3 second difference, 4 log, 5 log first
difference, 6 log second difference, 7 first difference of the
period-over-period ratio minus one.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .series import SeriesMatrix

TRANSFORM_CODES = (1, 2, 3, 4, 5, 6, 7)

# leading observations consumed by each code's differencing
_CONSUMED = {1: 0, 2: 1, 3: 2, 4: 0, 5: 1, 6: 2, 7: 2}

_MISSING_TOKENS = frozenset({"", "na", "nan", "null", "."})


@dataclass(frozen=True)
class DatasetSpec:
    """Where a data file lives and how to read it.

    ``transform_codes`` maps column names to codes; unnamed columns stay at
    code 1 (no transform). ``date_column`` names a label column excluded
    from the numeric panel.
    """

    path: str
    target_column: str
    transform_codes: dict | None = field(default=None)
    date_column: str | None = field(default=None)

    def __post_init__(self):
        if not self.target_column:
            raise InputError("target_column must be set")
        codes = self.transform_codes
        if codes is not None:
            for name, code in codes.items():
                if code not in TRANSFORM_CODES:
                    raise InputError(
                        f"column {name!r}: transform code must be 1-7, got {code}"
                    )


@dataclass(frozen=True)
class LoadReport:
    """What happened on the way from file to aligned matrix."""

    rows_read: int
    missing_rows_dropped: int
    leading_rows_dropped: int
    columns: tuple[str, ...]


def _parse_rows(path: str):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        names = tuple(h.strip() for h in header)
        if len(set(names)) != len(names):
            raise InputError(f"{path}: duplicate column names in header")
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(names):
                raise InputError(
                    f"{path}: data row {len(rows) + 1} has {len(row)} cells, "
                    f"expected {len(names)}"
                )
            rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return names, rows


def _to_float(token: str, row: int, column: str):
    text = token.strip()
    if text.lower() in _MISSING_TOKENS:
        return np.nan
    try:
        return float(text)
    except ValueError:
        raise InputError(
            f"cell at data row {row}, column {column!r}: "
            f"cannot parse {text!r} as a number"
        ) from None


def _apply_code(col: np.ndarray, code: int, name: str):
    if code == 1:
        return col, 0
    if code == 2:
        return col[1:] - col[:-1], 1
    if code == 3:
        d = col[1:] - col[:-1]
        return d[1:] - d[:-1], 2
    if code in (4, 5, 6):
        if np.any(col <= 0):
            raise InputError(
                f"column {name!r}: log transform (code {code}) needs "
                "strictly positive values"
            )
        lx = np.log(col)
        if code == 4:
            return lx, 0
        d = lx[1:] - lx[:-1]
        if code == 5:
            return d, 1
        return d[1:] - d[:-1], 2
    if np.any(col[:-1] == 0):
        raise InputError(
            f"column {name!r}: ratio transform (code 7) divides by zero"
        )
    ratio = col[1:] / col[:-1] - 1.0
    return ratio[1:] - ratio[:-1], 2


def load_csv(spec: DatasetSpec) -> tuple[SeriesMatrix, LoadReport]:
    """Read a data file, transform each column to stationarity, and align.

    Rows containing any missing value are dropped before transforming.
    Differencing consumes leading observations, so after transforming,
    every column is trimmed to the shortest one and the drop counts are
    reported alongside the matrix.
    """
    names, rows = _parse_rows(spec.path)
    date_pos = None
    if spec.date_column is not None:
        if spec.date_column not in names:
            raise InputError(f"date column {spec.date_column!r} not in file")
        date_pos = names.index(spec.date_column)
    value_names = tuple(n for i, n in enumerate(names) if i != date_pos)
    if spec.target_column not in value_names:
        raise InputError(f"target column {spec.target_column!r} not in file")
    codes = dict(spec.transform_codes or {})
    for name in codes:
        if name not in value_names:
            raise InputError(f"transform code given for unknown column {name!r}")

    raw = np.empty((len(rows), len(value_names)))
    labels = []
    for i, row in enumerate(rows):
        vals = [c for j, c in enumerate(row) if j != date_pos]
        if date_pos is not None:
            labels.append(row[date_pos].strip())
        for j, token in enumerate(vals):
            raw[i, j] = _to_float(token, i + 1, value_names[j])

    keep = ~np.isnan(raw).any(axis=1)
    missing_dropped = int((~keep).sum())
    raw = raw[keep]
    labels = [lab for lab, k in zip(labels, keep) if k] if labels else []
    if raw.shape[0] == 0:
        raise InputError(f"{spec.path}: no complete rows")

    transformed = []
    consumed = []
    for j, name in enumerate(value_names):
        out, used = _apply_code(raw[:, j], codes.get(name, 1), name)
        transformed.append(out)
        consumed.append(used)
    lead = max(consumed)
    if raw.shape[0] - lead < 1:
        raise InputError(
            f"{spec.path}: differencing consumed all {raw.shape[0]} rows"
        )
    aligned = np.column_stack(
        [arr[lead - used :] if lead > used else arr
         for arr, used in zip(transformed, consumed)]
    )
    index = tuple(labels[lead:]) if labels else None
    report = LoadReport(
        rows_read=len(rows),
        missing_rows_dropped=missing_dropped,
        leading_rows_dropped=lead,
        columns=value_names,
    )
    return SeriesMatrix(aligned, value_names, index), report


def save_series_csv(series: SeriesMatrix, path: str) -> None:
    """Write a panel as UTF-8 CSV with shortest round-trip float text.

    Loading the file back with all-level transform codes reproduces the
    matrix bit-exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if series.index is not None:
            writer.writerow(("date",) + series.columns)
            for lab, row in zip(series.index, series.values):
                writer.writerow([lab] + [repr(float(v)) for v in row])
        else:
            writer.writerow(series.columns)
            for row in series.values:
                writer.writerow([repr(float(v)) for v in row])


def read_forecast_errors(path: str) -> tuple[np.ndarray, np.ndarray | None]:
    """Read signed errors from a stored forecast table.

    The file must have ``predicted`` and ``realized`` columns; an ``origin``
    column, when present, is returned for aligning two files.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise InputError(f"{path}: empty file")
        fields = set(reader.fieldnames)
        if not {"predicted", "realized"} <= fields:
            raise InputError(
                f"{path}: needs 'predicted' and 'realized' columns, "
                f"found {sorted(fields)}"
            )
        errors, origins = [], []
        for i, row in enumerate(reader):
            p = _to_float(row["predicted"], i + 1, "predicted")
            r = _to_float(row["realized"], i + 1, "realized")
            if np.isnan(p) or np.isnan(r):
                raise InputError(f"{path}: missing value at data row {i + 1}")
            errors.append(p - r)
            if "origin" in fields:
                origins.append(int(float(row["origin"])))
    if not errors:
        raise InputError(f"{path}: no forecast rows")
    out_origins = np.asarray(origins) if origins else None
    return np.asarray(errors), out_origins
