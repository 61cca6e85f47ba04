# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Arithmetic order matches the numpy reference exactly; the extension is built
with ``-ffp-contract=off`` so no fused multiply-adds change the rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs
from libc.stdlib cimport qsort

cnp.import_array()

ctypedef cnp.npy_intp intp_t

cdef int EUCLIDEAN = 0


cdef int _cmp_intp(const void* x, const void* y) noexcept nogil:
    cdef intp_t a = (<intp_t*>x)[0]
    cdef intp_t b = (<intp_t*>y)[0]
    return (a > b) - (a < b)


def point_distance(const double[:, :] points, Py_ssize_t i, Py_ssize_t j, int metric):
    cdef Py_ssize_t a
    cdef double acc = 0.0, diff
    for a in range(points.shape[1]):
        diff = points[i, a] - points[j, a]
        if metric == EUCLIDEAN:
            acc += diff * diff
        else:
            acc += fabs(diff)
    if metric == EUCLIDEAN:
        return sqrt(acc)
    return acc


cdef void _accumulate(const double* col, double c, double* acc, Py_ssize_t n,
                     bint euclid) noexcept nogil:
    cdef Py_ssize_t j
    cdef double diff
    if euclid:
        for j in range(n):
            diff = col[j] - c
            acc[j] += diff * diff
    else:
        for j in range(n):
            acc[j] += fabs(col[j] - c)


def greedy_net_scan(points, double epsilon, int metric, order):
    # axis-major copy: one contiguous pass per axis, like the numpy reference
    cdef const double[:, ::1] Xt = np.ascontiguousarray(np.asarray(points, dtype=np.float64).T)
    cdef const intp_t[::1] visit = np.ascontiguousarray(order, dtype=np.intp)
    cdef Py_ssize_t d = Xt.shape[0], n = Xt.shape[1]
    cdef Py_ssize_t t, j, a, p, k = 0, filled = 0
    cdef bint euclid = metric == EUCLIDEAN
    cdef double[::1] acc = np.empty(max(n, 1), dtype=np.float64)
    cdef cnp.uint8_t[::1] covered = np.zeros(n, dtype=np.uint8)
    cdef intp_t[::1] centers = np.empty(n, dtype=np.intp)
    cdef intp_t[::1] indptr = np.zeros(n + 1, dtype=np.intp)
    cdef intp_t[::1] indices
    buf = np.empty(max(n, 16), dtype=np.intp)
    indices = buf

    for t in range(visit.shape[0]):
        p = visit[t]
        if covered[p]:
            continue
        centers[k] = p
        for j in range(n):
            acc[j] = 0.0
        for a in range(d):
            _accumulate(&Xt[a, 0], Xt[a, p], &acc[0], n, euclid)
        for j in range(n):
            if (sqrt(acc[j]) if euclid else acc[j]) <= epsilon:
                if filled == indices.shape[0]:
                    buf = np.concatenate([buf, np.empty_like(buf)])
                    indices = buf
                indices[filled] = j
                filled += 1
                covered[j] = 1
        k += 1
        indptr[k] = filled

    return (
        np.asarray(centers[:k]).copy(),
        np.asarray(indptr[:k + 1]).copy(),
        buf[:filled].copy(),
    )


def ball_edges(members_indptr, members_indices, membership_indptr,
               membership_indices, Py_ssize_t n_balls):
    cdef const intp_t[::1] m_ptr = np.ascontiguousarray(members_indptr, dtype=np.intp)
    cdef const intp_t[::1] m_idx = np.ascontiguousarray(members_indices, dtype=np.intp)
    cdef const intp_t[::1] p_ptr = np.ascontiguousarray(membership_indptr, dtype=np.intp)
    cdef const intp_t[::1] p_idx = np.ascontiguousarray(membership_indices, dtype=np.intp)
    cdef cnp.int64_t[::1] count = np.zeros(max(n_balls, 1), dtype=np.int64)
    cdef intp_t[::1] touched = np.empty(max(n_balls, 1), dtype=np.intp)
    cdef Py_ssize_t a, b, s, t, u, p, ntouched, filled = 0, cap = 64

    out_a = np.empty(cap, dtype=np.intp)
    out_b = np.empty(cap, dtype=np.intp)
    out_c = np.empty(cap, dtype=np.int64)
    cdef intp_t[::1] va = out_a
    cdef intp_t[::1] vb = out_b
    cdef cnp.int64_t[::1] vc = out_c

    for a in range(n_balls):
        ntouched = 0
        for t in range(m_ptr[a], m_ptr[a + 1]):
            p = m_idx[t]
            for s in range(p_ptr[p], p_ptr[p + 1]):
                b = p_idx[s]
                if b > a:
                    if count[b] == 0:
                        touched[ntouched] = b
                        ntouched += 1
                    count[b] += 1
        if ntouched == 0:
            continue
        qsort(&touched[0], ntouched, sizeof(intp_t), _cmp_intp)
        if filled + ntouched > cap:
            while filled + ntouched > cap:
                cap *= 2
            out_a = np.concatenate([out_a[:filled], np.empty(cap - filled, dtype=np.intp)])
            out_b = np.concatenate([out_b[:filled], np.empty(cap - filled, dtype=np.intp)])
            out_c = np.concatenate([out_c[:filled], np.empty(cap - filled, dtype=np.int64)])
            va = out_a
            vb = out_b
            vc = out_c
        for u in range(ntouched):
            b = touched[u]
            va[filled] = a
            vb[filled] = b
            vc[filled] = count[b]
            count[b] = 0
            filled += 1

    return out_a[:filled].copy(), out_b[:filled].copy(), out_c[:filled].copy()
