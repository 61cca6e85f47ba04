"""Pure numpy implementations of the hot kernels.

These are the reference implementations; ``_ckernels`` must reproduce them
bit for bit. Distances are accumulated axis by axis, in axis order, so the
rounding sequence matches the compiled loop exactly.
"""

import math

import numpy as np
from scipy import sparse

EUCLIDEAN = 0
MANHATTAN = 1


def point_distance(points, i, j, metric):
    acc = 0.0
    for a in range(points.shape[1]):
        diff = float(points[i, a]) - float(points[j, a])
        if metric == EUCLIDEAN:
            acc += diff * diff
        else:
            acc += abs(diff)
    return math.sqrt(acc) if metric == EUCLIDEAN else acc


def distances_from(points_t, center, metric):
    """Distances from column ``center`` to every column of the (d, n) array."""
    d, n = points_t.shape
    acc = np.zeros(n)
    for a in range(d):
        diff = points_t[a] - points_t[a, center]
        if metric == EUCLIDEAN:
            acc += diff * diff
        else:
            acc += np.abs(diff)
    if metric == EUCLIDEAN:
        np.sqrt(acc, out=acc)
    return acc


def greedy_net_scan(points, epsilon, metric, order):
    """Greedy epsilon-net over ``points`` visiting candidates in ``order``.

    Returns ``(centers, indptr, indices)`` where ball ``b`` covers the rows
    ``indices[indptr[b]:indptr[b + 1]]`` (ascending).
    """
    points_t = np.ascontiguousarray(points.T, dtype=np.float64)
    n = points_t.shape[1]
    covered = np.zeros(n, dtype=bool)
    centers = []
    chunks = []
    for p in order:
        if covered[p]:
            continue
        hit = np.flatnonzero(distances_from(points_t, p, metric) <= epsilon)
        covered[hit] = True
        centers.append(p)
        chunks.append(hit)
    indptr = np.zeros(len(centers) + 1, dtype=np.intp)
    indptr[1:] = np.cumsum([len(c) for c in chunks])
    indices = np.concatenate(chunks).astype(np.intp) if chunks else np.zeros(0, np.intp)
    return np.asarray(centers, dtype=np.intp), indptr, indices


def ball_edges(members_indptr, members_indices, membership_indptr, membership_indices, n_balls):
    """Edges ``a < b`` between balls sharing at least one point, with counts.

    Output arrays are sorted by ``(a, b)``.
    """
    n_points = len(membership_indptr) - 1
    data = np.ones(len(members_indices), dtype=np.int64)
    incidence = sparse.csr_matrix(
        (data, members_indices, members_indptr), shape=(n_balls, n_points)
    )
    shared = sparse.triu(incidence @ incidence.T, k=1).tocoo()
    a = shared.row.astype(np.intp)
    b = shared.col.astype(np.intp)
    counts = shared.data.astype(np.int64)
    keep = counts > 0
    a, b, counts = a[keep], b[keep], counts[keep]
    order = np.lexsort((b, a))
    return a[order], b[order], counts[order]
