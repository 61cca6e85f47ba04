"""Artificial data with exactly controlled sample correlations.

A column with sample correlation ``r`` against a base column ``x0`` is built
from the standardized base and the standardized OLS residuals of an
independent draw ``y0`` regressed on ``x0``. Because those residuals are
orthogonal to ``x0`` the realized correlation is ``r`` up to rounding.

All randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cloud import PointCloud
from .errors import DataError

GENERATOR = "numpy.random.PCG64"


def standardize(x) -> np.ndarray:
    """Subtract the sample mean and divide by the sample sd (divisor n - 1)."""
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean()
    sd = np.sqrt((centered @ centered) / (len(x) - 1))
    if not sd > 0:
        raise DataError("cannot standardize a constant series")
    return centered / sd


def ols_residuals(y, x) -> np.ndarray:
    """Residuals of the simple regression ``y ~ 1 + x`` (slope = cov / var)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    if not sxx > 0:
        raise DataError("regressor is constant")
    return yc - (xc @ yc / sxx) * xc


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64) - np.mean(a)
    b = np.asarray(b, dtype=np.float64) - np.mean(b)
    return float(a @ b / np.sqrt((a @ a) * (b @ b)))


def gen_correlated(x0, y0, r: float) -> np.ndarray:
    """Series whose sample correlation with ``x0`` is exactly ``r``."""
    x0 = np.asarray(x0, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    if x0.shape != y0.shape or x0.ndim != 1:
        raise DataError("x0 and y0 must be 1-D series of equal length")
    if len(x0) < 3:
        raise DataError("need at least 3 observations")
    if not abs(r) <= 1:
        raise DataError(f"target correlation must lie in [-1, 1], got {r}")
    base = standardize(x0)
    if abs(r) == 1:
        return base * r
    resid = ols_residuals(y0, x0)
    yc = y0 - y0.mean()
    # residuals at rounding level mean y0 is collinear with x0
    if not np.sqrt(resid @ resid) > 1e-10 * np.sqrt(yc @ yc):
        raise DataError("y0 is collinear with x0; residuals carry no independent variation")
    noise = standardize(resid)
    return base * r + noise * np.sqrt(1 - r * r)


def grid_correlation(i: int) -> float:
    return i / 100 - 1


@dataclass(frozen=True)
class SyntheticSpec:
    n: int = 1000
    seed: int = 0
    grid: tuple[int, ...] = tuple(range(1, 199))

    def __post_init__(self):
        if self.n < 3:
            raise DataError("n must be at least 3")
        for i in self.grid:
            if not abs(grid_correlation(i)) < 1:
                raise DataError(f"grid index {i} gives |r| >= 1")

    @property
    def r_grid(self) -> list[float]:
        return [grid_correlation(i) for i in self.grid]


@dataclass(frozen=True)
class OutcomeSpec:
    coefficients: tuple[float, float] = (0.3, 0.6)
    noise_sd: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.coefficients).all() or not np.isfinite(self.noise_sd):
            raise DataError("outcome coefficients and noise sd must be finite")
        if self.noise_sd < 0:
            raise DataError("noise sd must be non-negative")


def base_pair(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Independent standard-normal ``x0`` then ``y0`` from one seeded stream."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n), rng.standard_normal(n)


def gen_grid(spec: SyntheticSpec) -> PointCloud:
    """``x_0`` plus one column ``x_i`` per grid index with correlation ``i/100 - 1``."""
    x0, y0 = base_pair(spec.n, spec.seed)
    cols = [x0] + [gen_correlated(x0, y0, r) for r in spec.r_grid]
    names = ("x_0",) + tuple(f"x_{i}" for i in spec.grid)
    return PointCloud(names, np.column_stack(cols))


def gen_outcome(x0, y0, spec: OutcomeSpec = OutcomeSpec(), seed: int = 0) -> np.ndarray:
    x0 = np.asarray(x0, dtype=np.float64)
    y0 = np.asarray(y0, dtype=np.float64)
    if x0.shape != y0.shape:
        raise DataError(f"length mismatch: {len(x0)} vs {len(y0)}")
    a, b = spec.coefficients
    m = a * x0 + b * y0
    if spec.noise_sd:
        m = m + spec.noise_sd * np.random.default_rng(seed).standard_normal(len(x0))
    return m


def gen_normal_cloud(
    n: int,
    d: int,
    targets: Sequence[float] = (),
    seed: int = 0,
    outcome: OutcomeSpec | None = None,
) -> PointCloud:
    """Standard-normal cloud whose columns 1..d-1 hit ``targets`` against column 0.

    ``x_0`` is ``default_rng(seed).standard_normal(n)``; the independent
    draw behind column ``j`` comes from child ``j - 1`` of
    ``SeedSequence(seed).spawn(d)``, so a column does not depend on how many
    others are generated. With ``outcome`` set, a metadata column ``M`` is
    built from ``x_0`` and ``x_1`` (``x_0`` alone when ``d == 1``) with noise
    from the last child stream.
    """
    targets = list(targets)
    if d < 1:
        raise DataError("d must be at least 1")
    if len(targets) != d - 1:
        raise DataError(f"{d} dimensions need {d - 1} correlation targets, got {len(targets)}")
    for r in targets:
        if not abs(r) < 1:
            raise DataError(f"infeasible correlation target {r}")
    children = np.random.SeedSequence(seed).spawn(d)
    x0 = np.random.default_rng(seed).standard_normal(n)
    cols = [x0]
    for j, r in enumerate(targets, start=1):
        y = np.random.default_rng(children[j - 1]).standard_normal(n)
        cols.append(gen_correlated(x0, y, r))
    names = tuple(f"x_{j}" for j in range(d))
    meta = {}
    if outcome is not None:
        second = cols[1] if d > 1 else np.zeros(n)
        noise_seed = int(children[d - 1].generate_state(1)[0])
        meta["M"] = gen_outcome(x0, second, outcome, seed=noise_seed)
    return PointCloud(names, np.column_stack(cols), meta)
