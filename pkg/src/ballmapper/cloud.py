"""Point clouds, CSV ingestion and data preparation.

A :class:`PointCloud` holds the axis coordinates the cover is built on plus
any number of metadata columns (year, country, outcome...) aligned to rows.
Every preparation step returns a new cloud together with a
:class:`PrepReport` counting the rows it removed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._io import atomic_write, format_number
from .errors import CSVFormatError, DataError

MISSING_TOKENS = frozenset({"", "na", "nan", "n/a", "null", "none", "."})

SKEWNESS_ESTIMATOR = "population g1 = m3 / m2**1.5 (divisor n)"


@dataclass(frozen=True, eq=False)
class PointCloud:
    axis_names: tuple[str, ...]
    points: np.ndarray
    meta: Mapping[str, np.ndarray] = field(default_factory=dict)
    row_ids: np.ndarray | None = None

    def __post_init__(self):
        names = tuple(str(a) for a in self.axis_names)
        points = np.array(self.points, dtype=np.float64, copy=True)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2:
            raise DataError("points must be an n x d matrix")
        n, d = points.shape
        if n < 1 or d < 1:
            raise DataError(f"a point cloud needs n >= 1 and d >= 1, got {n} x {d}")
        if len(names) != d:
            raise DataError(f"{len(names)} axis names for {d} columns")
        if any(not a for a in names) or len(set(names)) != d:
            raise DataError(f"axis names must be unique and nonempty: {names}")
        if not np.isfinite(points).all():
            raise DataError("axis values must all be finite")

        meta = {}
        for key, col in self.meta.items():
            if key in names:
                raise DataError(f"column {key!r} is both an axis and metadata")
            col = np.array(col, copy=True)
            if col.dtype.kind in "iufb":
                col = col.astype(np.float64)
            else:
                col = col.astype(object)
            if col.shape != (n,):
                raise DataError(f"metadata column {key!r} has {len(col)} rows, expected {n}")
            col.flags.writeable = False
            meta[str(key)] = col

        row_ids = np.arange(n) if self.row_ids is None else np.array(self.row_ids, dtype=np.int64)
        if row_ids.shape != (n,) or len(np.unique(row_ids)) != n:
            raise DataError("row_ids must be unique, one per row")

        points.flags.writeable = False
        row_ids.flags.writeable = False
        object.__setattr__(self, "axis_names", names)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "meta", meta)
        object.__setattr__(self, "row_ids", row_ids)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def columns(self) -> list[str]:
        return list(self.axis_names) + list(self.meta)

    def column(self, name: str) -> np.ndarray:
        if name in self.axis_names:
            return self.points[:, self.axis_names.index(name)]
        if name in self.meta:
            return self.meta[name]
        raise DataError(f"unknown column {name!r}; available: {', '.join(self.columns)}")

    def numeric_column(self, name: str) -> np.ndarray:
        col = self.column(name)
        if col.dtype != np.float64:
            raise DataError(f"column {name!r} is not numeric")
        return col

    def take(self, rows) -> PointCloud:
        """Subset (or reorder) rows; row ids travel with their rows."""
        rows = np.asarray(rows)
        return PointCloud(
            self.axis_names,
            self.points[rows],
            {k: v[rows] for k, v in self.meta.items()},
            self.row_ids[rows],
        )

    def with_points(self, points) -> PointCloud:
        return PointCloud(self.axis_names, points, self.meta, self.row_ids)

    def fingerprint(self) -> str:
        """Content hash of the axis names, row ids and coordinates."""
        head = json.dumps(
            {"axes": list(self.axis_names), "row_ids": [int(r) for r in self.row_ids]},
            separators=(",", ":"),
        )
        h = hashlib.sha256(head.encode("utf-8"))
        h.update(np.ascontiguousarray(self.points, dtype="<f8").tobytes())
        return "sha256:" + h.hexdigest()


@dataclass(frozen=True)
class PrepReport:
    rows_in: int
    rows_dropped_missing: int = 0
    rows_dropped_filter: int = 0
    rows_out: int | None = None

    def __post_init__(self):
        out = self.rows_out
        if out is None:
            out = self.rows_in - self.rows_dropped_missing - self.rows_dropped_filter
            object.__setattr__(self, "rows_out", out)
        if self.rows_in != out + self.rows_dropped_missing + self.rows_dropped_filter:
            raise ValueError(f"inconsistent report: {self}")

    def then(self, later: PrepReport) -> PrepReport:
        """Chain two steps, the second consuming the first's output rows."""
        if later.rows_in != self.rows_out:
            raise ValueError("reports do not chain")
        return PrepReport(
            self.rows_in,
            self.rows_dropped_missing + later.rows_dropped_missing,
            self.rows_dropped_filter + later.rows_dropped_filter,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def _parse_float(text: str) -> float:
    text = text.strip()
    if text.lower() in MISSING_TOKENS:
        return math.nan
    try:
        return float(text)
    except ValueError:
        return math.nan


def _is_missing(text: str) -> bool:
    return text.strip().lower() in MISSING_TOKENS


def read_header(path) -> list[str]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise CSVFormatError("missing header row", line=1)
    return [h.strip() for h in header]


def load_csv(
    path, axis_columns: Sequence[str], meta_columns: Sequence[str] = ()
) -> tuple[PointCloud, PrepReport]:
    """Read a comma-separated file with a header row into a point cloud.

    Rows where any axis value is missing, non-numeric or non-finite are
    dropped and counted. Metadata columns are numeric when every non-missing
    entry parses as a number (missing entries become NaN), text otherwise.
    ``row_ids`` are 0-based data-row positions in the file.
    """
    axis_columns = list(axis_columns)
    meta_columns = list(meta_columns)
    if not axis_columns:
        raise DataError("at least one axis column is required")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise CSVFormatError("missing header row", line=1)
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise CSVFormatError("duplicate column names in header", line=1)
        index = {name: i for i, name in enumerate(header)}
        for name in axis_columns + meta_columns:
            if name not in index:
                raise DataError(f"unknown column {name!r}; header has: {', '.join(header)}")
        axis_idx = [index[a] for a in axis_columns]
        meta_idx = [index[m] for m in meta_columns]

        rows, raw_meta, row_ids = [], [], []
        rows_in = dropped = 0
        for record in reader:
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if len(record) != len(header):
                raise CSVFormatError(
                    f"expected {len(header)} fields, found {len(record)}", line=reader.line_num
                )
            data_row = rows_in
            rows_in += 1
            values = [_parse_float(record[i]) for i in axis_idx]
            if not all(math.isfinite(v) for v in values):
                dropped += 1
                continue
            rows.append(values)
            raw_meta.append([record[i] for i in meta_idx])
            row_ids.append(data_row)

    if not rows:
        raise DataError(f"no rows left after dropping {dropped} rows with missing axis values")
    meta = {}
    for j, name in enumerate(meta_columns):
        texts = [r[j] for r in raw_meta]
        parsed = [_parse_float(t) for t in texts]
        numeric = all(_is_missing(t) or not math.isnan(v) for t, v in zip(texts, parsed))
        meta[name] = np.array(parsed, dtype=np.float64) if numeric else np.array(texts, dtype=object)
    cloud = PointCloud(tuple(axis_columns), np.array(rows, dtype=np.float64), meta, row_ids)
    return cloud, PrepReport(rows_in, rows_dropped_missing=dropped)


def write_csv(cloud: PointCloud, path) -> None:
    """Write axes then metadata columns; numbers round-trip exactly."""
    with atomic_write(path, newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cloud.columns)
        metas = list(cloud.meta.values())
        for i in range(cloud.n):
            row = [format_number(v) for v in cloud.points[i]]
            for col in metas:
                v = col[i]
                row.append(format_number(v) if col.dtype == np.float64 else str(v))
            writer.writerow(row)


def filter_range(cloud: PointCloud, column: str, lo: float, hi: float) -> tuple[PointCloud, PrepReport]:
    """Keep rows with ``lo <= value <= hi`` (bounds inclusive, NaN dropped)."""
    if lo > hi:
        raise DataError(f"empty range: lo={lo} > hi={hi}")
    values = cloud.numeric_column(column)
    with np.errstate(invalid="ignore"):
        keep = (values >= lo) & (values <= hi)
    kept = int(keep.sum())
    if kept == 0:
        raise DataError(f"filter on {column!r} to [{lo}, {hi}] removed every row")
    report = PrepReport(cloud.n, rows_dropped_filter=cloud.n - kept)
    return cloud.take(np.flatnonzero(keep)), report


def rolling_moments(series: Iterable[float], window: int) -> np.ndarray:
    """Mean, sample sd and skewness over each contiguous window.

    Returns an array of shape ``(len(series) - window + 1, 3)``. Skewness is
    the population estimator ``m3 / m2**1.5``; windows with zero variance get
    NaN skewness (and sd exactly 0), as do windows whose variance underflows.
    """
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1:
        raise DataError("series must be one-dimensional")
    if window < 2:
        raise DataError(f"window must be at least 2, got {window}")
    if len(x) < window:
        raise DataError(f"series of length {len(x)} is shorter than window {window}")
    if not np.isfinite(x).all():
        raise DataError("series contains non-finite values")

    windows = sliding_window_view(x, window)
    mean = windows.mean(axis=1)
    dev = windows - mean[:, None]
    m2 = (dev**2).mean(axis=1)
    m3 = (dev**3).mean(axis=1)
    flat = windows.max(axis=1) == windows.min(axis=1)
    sd = np.sqrt(m2 * (window / (window - 1)))
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = m3 / m2**1.5
    sd[flat] = 0.0
    skew[flat | (m2 == 0)] = np.nan
    return np.column_stack([mean, sd, skew])


def rolling_cloud(
    cloud: PointCloud,
    column: str,
    window: int,
    group_by: str | None = None,
    order_by: str | None = None,
) -> tuple[PointCloud, PrepReport]:
    """Replace the rows of ``cloud`` by rolling (mean, sd, skew) of ``column``.

    Each output row is aligned to the last observation of its window and
    carries that row's metadata. With ``group_by`` the windows never cross
    group boundaries. Windows with undefined skewness are dropped; the report
    counts windows, not input rows.
    """
    values = cloud.numeric_column(column)
    groups = [np.arange(cloud.n)]
    if group_by is not None:
        key = cloud.column(group_by)
        _, first = np.unique(key.astype(str), return_index=True)
        groups = [np.flatnonzero(key == key[i]) for i in sorted(first)]
    if order_by is not None:
        order_col = cloud.numeric_column(order_by)
        groups = [g[np.argsort(order_col[g], kind="stable")] for g in groups]

    stats, last_rows = [], []
    for rows in groups:
        if len(rows) < window:
            continue
        stats.append(rolling_moments(values[rows], window))
        last_rows.append(rows[window - 1:])
    if not stats:
        raise DataError(f"no group has at least {window} observations")
    stats = np.vstack(stats)
    last_rows = np.concatenate(last_rows)
    defined = np.isfinite(stats).all(axis=1)
    if not defined.any():
        raise DataError("every window has zero variance")

    names = tuple(f"{column}_{s}{window}" for s in ("mean", "sd", "skew"))
    base = cloud.take(last_rows[defined])
    meta = {k: v for k, v in base.meta.items()}
    for j, axis in enumerate(base.axis_names):
        if axis != column:
            meta.setdefault(axis, base.points[:, j])
    out = PointCloud(names, stats[defined], meta, base.row_ids)
    report = PrepReport(len(stats), rows_dropped_missing=int((~defined).sum()))
    return out, report


def axis_ranges(cloud: PointCloud) -> dict[str, tuple[float, float]]:
    lo = cloud.points.min(axis=0)
    hi = cloud.points.max(axis=0)
    return {a: (float(lo[j]), float(hi[j])) for j, a in enumerate(cloud.axis_names)}


def normalize_minmax(cloud: PointCloud, return_ranges: bool = False):
    """Map every axis onto [0, 1] by ``(x - min) / (max - min)``.

    Metadata is untouched. Constant axes are rejected. With
    ``return_ranges=True`` also return the per-axis ``(min, max)`` used.
    """
    ranges = axis_ranges(cloud)
    for axis, (lo, hi) in ranges.items():
        if not hi > lo:
            raise DataError(f"axis {axis!r} is constant and cannot be normalized")
    lo = cloud.points.min(axis=0)
    hi = cloud.points.max(axis=0)
    scaled = (cloud.points - lo) / (hi - lo)
    out = cloud.with_points(scaled)
    return (out, ranges) if return_ranges else out
