"""Greedy epsilon-net ball covers."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .cloud import PointCloud
from .errors import DataError


class Metric(str, Enum):
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"

    @property
    def code(self) -> int:
        return kernels.EUCLIDEAN if self is Metric.EUCLIDEAN else kernels.MANHATTAN


class PickOrder(str, Enum):
    FIRST_UNCOVERED_BY_ROW = "first_uncovered_by_row"
    RANDOM_WITH_SEED = "random_with_seed"


@dataclass(frozen=True)
class NetPolicy:
    """How the next uncovered point is chosen as a center.

    ``first_uncovered_by_row`` takes the lowest uncovered row index.
    ``random_with_seed`` visits rows in a permutation drawn from numpy's
    PCG64 generator seeded with ``seed``.
    """

    pick_order: PickOrder = PickOrder.FIRST_UNCOVERED_BY_ROW
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pick_order", PickOrder(self.pick_order))

    def visit_order(self, n: int) -> np.ndarray:
        if self.pick_order is PickOrder.RANDOM_WITH_SEED:
            return np.random.default_rng(self.seed).permutation(n).astype(np.intp)
        return np.arange(n, dtype=np.intp)


@dataclass(frozen=True, eq=False)
class BallCover:
    """An epsilon-net cover stored as two CSR incidence structures.

    Ball ``b`` (numbered in creation order) covers rows
    ``members_indices[members_indptr[b]:members_indptr[b+1]]``; point ``p``
    lies in balls ``membership_indices[membership_indptr[p]:...]``.
    Row indices are positions in the cloud, not source row ids.
    """

    epsilon: float
    metric: Metric
    policy: NetPolicy
    centers: np.ndarray
    members_indptr: np.ndarray
    members_indices: np.ndarray
    membership_indptr: np.ndarray
    membership_indices: np.ndarray

    @property
    def n_balls(self) -> int:
        return len(self.centers)

    @property
    def n_points(self) -> int:
        return len(self.membership_indptr) - 1

    def members(self, ball: int) -> np.ndarray:
        return self.members_indices[self.members_indptr[ball]:self.members_indptr[ball + 1]]

    def membership(self, point: int) -> np.ndarray:
        return self.membership_indices[self.membership_indptr[point]:self.membership_indptr[point + 1]]

    def counts(self) -> np.ndarray:
        return np.diff(self.members_indptr)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "metric": self.metric.value,
            "pick_order": self.policy.pick_order.value,
            "seed": self.policy.seed,
            "centers": self.centers.tolist(),
            "members": [self.members(b).tolist() for b in range(self.n_balls)],
        }

    def serialize(self) -> bytes:
        return json.dumps(self.to_dict(), separators=(",", ":")).encode("utf-8")


def _transpose(indptr, indices, n_points):
    """Invert ball->points CSR into point->balls CSR (balls ascending)."""
    ball_of = np.repeat(np.arange(len(indptr) - 1, dtype=np.intp), np.diff(indptr))
    order = np.argsort(indices, kind="stable")
    counts = np.bincount(indices, minlength=n_points)
    out_ptr = np.zeros(n_points + 1, dtype=np.intp)
    np.cumsum(counts, out=out_ptr[1:])
    return out_ptr, ball_of[order]


def pairwise_distance(cloud: PointCloud, i: int, j: int, metric: Metric | str = Metric.EUCLIDEAN) -> float:
    """Distance between rows ``i`` and ``j``, computed exactly as the net does."""
    metric = Metric(metric)
    for idx in (i, j):
        if not 0 <= idx < cloud.n:
            raise IndexError(f"row {idx} out of range for {cloud.n} points")
    return float(kernels.point_distance(cloud.points, int(i), int(j), metric.code))


def greedy_net(
    cloud: PointCloud,
    epsilon: float,
    metric: Metric | str = Metric.EUCLIDEAN,
    policy: NetPolicy | None = None,
) -> BallCover:
    """Cover ``cloud`` with closed epsilon-balls centred on a greedy net.

    While some point is uncovered, the next uncovered point in the policy's
    visit order becomes a center and every point within ``epsilon`` of it
    (inclusive) is added to that ball.
    """
    if not (isinstance(epsilon, (int, float, np.floating)) and np.isfinite(epsilon) and epsilon > 0):
        raise DataError(f"epsilon must be a positive finite number, got {epsilon!r}")
    if cloud.n < 1:
        raise DataError("cannot cover an empty cloud")
    metric = Metric(metric)
    policy = policy or NetPolicy()
    centers, indptr, indices = kernels.greedy_net_scan(
        cloud.points, float(epsilon), metric.code, policy.visit_order(cloud.n)
    )
    centers = np.asarray(centers, dtype=np.intp)
    indptr = np.asarray(indptr, dtype=np.intp)
    indices = np.asarray(indices, dtype=np.intp)
    m_ptr, m_idx = _transpose(indptr, indices, cloud.n)
    arrays = (centers, indptr, indices, m_ptr, m_idx)
    for a in arrays:
        a.flags.writeable = False
    return BallCover(float(epsilon), metric, policy, *arrays)
