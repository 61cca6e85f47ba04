"""Per-ball colorings and the rainbow palette."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._io import format_number
from .cloud import PointCloud
from .errors import DataError
from .graph import BMGraph

# red -> purple, evenly spaced stops, linear interpolation in RGB
RAINBOW = (
    (255, 0, 0),
    (255, 127, 0),
    (255, 255, 0),
    (0, 255, 0),
    (0, 0, 255),
    (75, 0, 130),
    (143, 0, 255),
)


@dataclass(frozen=True, eq=False)
class Coloring:
    values: np.ndarray
    label: str
    palette: str = "rainbow_red_to_purple"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or len(values) == 0:
            raise DataError("a coloring needs one value per ball")
        if not np.isfinite(values).all():
            raise DataError(f"coloring {self.label!r} has non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def scale(self) -> tuple[float, float]:
        return float(self.values.min()), float(self.values.max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["ball", "value", "color"])
        for i, (v, rgb) in enumerate(zip(self.values, scale_to_palette(self))):
            writer.writerow([i, format_number(v), to_hex(rgb)])
        return buf.getvalue()


@dataclass(frozen=True)
class ReferenceSpec:
    """Rows anchoring a distance coloring.

    Either a numeric ``column`` with an inclusive ``[lo, hi]`` range, or an
    explicit list of source ``row_ids``.
    """

    column: str | None = None
    lo: float = -np.inf
    hi: float = np.inf
    row_ids: tuple[int, ...] | None = None

    @classmethod
    def parse(cls, text: str) -> ReferenceSpec:
        """Parse ``column:lo..hi`` or ``rows:3,4,5``."""
        name, sep, rest = text.partition(":")
        if not sep:
            raise DataError(f"reference must look like column:lo..hi or rows:i,j,..., got {text!r}")
        if name == "rows":
            try:
                return cls(row_ids=tuple(int(r) for r in rest.split(",") if r.strip()))
            except ValueError as exc:
                raise DataError(f"bad row id list {rest!r}") from exc
        lo, dots, hi = rest.partition("..")
        if not dots:
            raise DataError(f"reference range must be lo..hi, got {rest!r}")
        try:
            return cls(column=name, lo=float(lo) if lo else -np.inf, hi=float(hi) if hi else np.inf)
        except ValueError as exc:
            raise DataError(f"bad reference bounds {rest!r}") from exc

    def select(self, cloud: PointCloud) -> np.ndarray:
        if self.row_ids is not None:
            rows = np.flatnonzero(np.isin(cloud.row_ids, np.asarray(self.row_ids)))
        elif self.column is not None:
            vals = cloud.numeric_column(self.column)
            with np.errstate(invalid="ignore"):
                rows = np.flatnonzero((vals >= self.lo) & (vals <= self.hi))
        else:
            raise DataError("reference needs a column range or a row list")
        if len(rows) == 0:
            raise DataError(f"reference {self} selects no rows")
        return rows


def ball_means(graph: BMGraph, values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.array([values[list(nd.members)].mean(axis=0) for nd in graph.nodes])


def _mean_coloring(graph, cloud, column, label):
    values = cloud.numeric_column(column)
    if not np.isfinite(values).all():
        raise DataError(f"column {column!r} has missing values; cannot average it")
    return Coloring(ball_means(graph, values), label)


def color_by_outcome(graph: BMGraph, cloud: PointCloud, outcome_col: str) -> Coloring:
    return _mean_coloring(graph, cloud, outcome_col, f"outcome:{outcome_col}")


def color_by_axis(graph: BMGraph, cloud: PointCloud, axis: str) -> Coloring:
    if axis not in cloud.axis_names:
        raise DataError(f"unknown axis {axis!r}; axes: {', '.join(cloud.axis_names)}")
    return _mean_coloring(graph, cloud, axis, f"axis:{axis}")


def color_by_year(graph: BMGraph, cloud: PointCloud, year_col: str) -> Coloring:
    return _mean_coloring(graph, cloud, year_col, f"year:{year_col}")


def reference_centroid(cloud: PointCloud, ref: ReferenceSpec) -> np.ndarray:
    return cloud.points[ref.select(cloud)].mean(axis=0)


def color_by_distance(graph: BMGraph, cloud: PointCloud, ref: ReferenceSpec) -> Coloring:
    """L1 distance from each ball's axis-mean vector to the reference centroid."""
    centroid = reference_centroid(cloud, ref)
    means = ball_means(graph, cloud.points)
    return Coloring(np.abs(means - centroid).sum(axis=1), "distance")


def _interpolate(t: float) -> tuple[int, int, int]:
    pos = t * (len(RAINBOW) - 1)
    i = min(int(pos), len(RAINBOW) - 2)
    frac = pos - i
    lo, hi = RAINBOW[i], RAINBOW[i + 1]
    return tuple(int(round(a + (b - a) * frac)) for a, b in zip(lo, hi))


def scale_to_palette(coloring: Coloring) -> list[tuple[int, int, int]]:
    """Linear map of values onto the palette; a constant coloring maps to its midpoint."""
    vmin, vmax = coloring.scale
    if vmax == vmin:
        return [_interpolate(0.5)] * len(coloring.values)
    return [_interpolate((v - vmin) / (vmax - vmin)) for v in coloring.values]


def to_hex(rgb: Sequence[int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*rgb)
