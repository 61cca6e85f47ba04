"""Ball Mapper graphs: one vertex per ball, an edge wherever two balls share a point."""

from __future__ import annotations

import csv
import io
import json
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from ._io import format_number
from .cloud import PointCloud
from .errors import DataError, MismatchError
from .net import BallCover


@dataclass(frozen=True)
class Node:
    id: int
    center_row: int
    members: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    shared: int


@dataclass(frozen=True, eq=False)
class BMGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    epsilon: float
    metric: str
    axis_names: tuple[str, ...]
    extra_meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.nodes)

    def counts(self) -> np.ndarray:
        return np.array([nd.count for nd in self.nodes], dtype=np.int64)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.nodes), dtype=np.int64)
        for e in self.edges:
            deg[e.a] += 1
            deg[e.b] += 1
        return deg

    def edge_set(self) -> set[tuple[int, int]]:
        return {(e.a, e.b) for e in self.edges}

    def to_dict(self) -> dict:
        meta = {"epsilon": self.epsilon, "metric": self.metric, "axes": list(self.axis_names)}
        meta.update(self.extra_meta)
        return {
            "meta": meta,
            "nodes": [
                {"id": nd.id, "center_row": nd.center_row, "members": list(nd.members), "count": nd.count}
                for nd in self.nodes
            ],
            "edges": [{"a": e.a, "b": e.b, "shared": e.shared} for e in self.edges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> BMGraph:
        try:
            meta = dict(data["meta"])
            nodes = tuple(
                Node(int(nd["id"]), int(nd["center_row"]), tuple(int(m) for m in nd["members"]))
                for nd in data["nodes"]
            )
            edges = tuple(Edge(int(e["a"]), int(e["b"]), int(e["shared"])) for e in data["edges"])
            epsilon = float(meta.pop("epsilon"))
            metric = str(meta.pop("metric"))
            axes = tuple(meta.pop("axes"))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed graph JSON: {exc}") from exc
        if [nd.id for nd in nodes] != list(range(len(nodes))):
            raise DataError("graph JSON node ids must be 0..k-1 in order")
        for nd, raw in zip(nodes, data["nodes"]):
            if nd.count != int(raw.get("count", nd.count)):
                raise DataError(f"node {nd.id}: count does not match members")
        return cls(nodes, edges, epsilon, metric, axes, meta)

    @classmethod
    def from_json(cls, text: str) -> BMGraph:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"graph file is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def check_cloud(self, cloud: PointCloud) -> None:
        """Refuse a cloud the graph was not built from."""
        expected = self.extra_meta.get("cloud_hash")
        if expected is not None and expected != cloud.fingerprint():
            raise MismatchError("graph was built from a different point cloud (cloud_hash mismatch)")
        if tuple(cloud.axis_names) != self.axis_names:
            raise MismatchError(f"graph axes {self.axis_names} differ from cloud axes {cloud.axis_names}")
        top = max((max(nd.members) for nd in self.nodes if nd.members), default=-1)
        if top >= cloud.n:
            raise MismatchError(f"graph references row {top} but cloud has {cloud.n} rows")


def build_graph(cover: BallCover, axis_names: Sequence[str] = (), **extra_meta) -> BMGraph:
    """Connect every pair of balls that appear together in some point's cover list."""
    a, b, shared = kernels.ball_edges(
        cover.members_indptr,
        cover.members_indices,
        cover.membership_indptr,
        cover.membership_indices,
        cover.n_balls,
    )
    nodes = tuple(
        Node(i, int(cover.centers[i]), tuple(int(m) for m in cover.members(i)))
        for i in range(cover.n_balls)
    )
    edges = tuple(Edge(int(x), int(y), int(s)) for x, y, s in zip(a, b, shared))
    return BMGraph(nodes, edges, cover.epsilon, cover.metric.value, tuple(axis_names), dict(extra_meta))


def list_outliers(graph: BMGraph) -> list[int]:
    return [int(i) for i in np.flatnonzero(graph.degrees() == 0)]


def connected_components(graph: BMGraph) -> list[list[int]]:
    """Components as sorted id lists, ordered by their smallest id."""
    adj = [[] for _ in graph.nodes]
    for e in graph.edges:
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)
    seen = [False] * len(adj)
    components = []
    for start in range(len(adj)):
        if seen[start]:
            continue
        seen[start] = True
        comp, queue = [], deque([start])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        components.append(sorted(comp))
    return components


@dataclass(frozen=True, eq=False)
class BallSummary:
    axis_names: tuple[str, ...]
    meta_names: tuple[str, ...]
    ball_ids: np.ndarray
    axis_means: np.ndarray  # (k, d)
    meta_min: np.ndarray  # (k, m)
    meta_max: np.ndarray  # (k, m)
    counts: np.ndarray

    @property
    def header(self) -> list[str]:
        cols = ["ball", *self.axis_names]
        for name in self.meta_names:
            cols += [f"{name}_min", f"{name}_max"]
        return cols + ["n"]

    def rows(self) -> list[list]:
        out = []
        for i, ball in enumerate(self.ball_ids):
            row = [int(ball), *self.axis_means[i]]
            for j in range(len(self.meta_names)):
                row += [self.meta_min[i, j], self.meta_max[i, j]]
            out.append(row + [int(self.counts[i])])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows():
            writer.writerow([format_number(v) for v in row])
        return buf.getvalue()


def ball_summary(graph: BMGraph, cloud: PointCloud, meta_cols: Sequence[str] = ()) -> BallSummary:
    """Per-ball axis means, min/max of numeric metadata columns, and member counts."""
    meta_cols = tuple(meta_cols)
    meta_values = [cloud.numeric_column(name) for name in meta_cols]
    k = graph.n_vertices
    means = np.empty((k, cloud.d))
    lo = np.empty((k, len(meta_cols)))
    hi = np.empty((k, len(meta_cols)))
    for i, node in enumerate(graph.nodes):
        rows = np.asarray(node.members, dtype=np.intp)
        means[i] = cloud.points[rows].mean(axis=0)
        for j, col in enumerate(meta_values):
            vals = col[rows]
            lo[i, j] = np.nanmin(vals) if np.isfinite(vals).any() else np.nan
            hi[i, j] = np.nanmax(vals) if np.isfinite(vals).any() else np.nan
    return BallSummary(
        tuple(cloud.axis_names),
        meta_cols,
        np.arange(k),
        means,
        lo,
        hi,
        graph.counts(),
    )
