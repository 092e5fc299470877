# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pykernels functions.

Same contracts, same tie-breaking; only the inner loops differ. Keep the
two implementations in lockstep: the cross-check test compares assignments
and matches between them.
"""

from libc.math cimport sqrt

import numpy as np


def leader_cluster(double[:, ::1] vectors, double[:] weights, double threshold):
    cdef Py_ssize_t n = vectors.shape[0]
    cdef Py_ssize_t dim = vectors.shape[1]
    assignments_arr = np.zeros(n, dtype=np.int64)
    sums_arr = np.zeros((n if n else 1, dim), dtype=np.float64)
    unit_arr = np.zeros((n if n else 1, dim), dtype=np.float64)
    totals_arr = np.zeros(n if n else 1, dtype=np.float64)
    cdef long long[:] assignments = assignments_arr
    cdef double[:, ::1] sums = sums_arr
    cdef double[:, ::1] unit = unit_arr
    cdef double[:] totals = totals_arr

    cdef Py_ssize_t i, c, d, best, k = 0
    cdef double dot, dist, best_dist, w, norm

    for i in range(n):
        w = weights[i]
        best = -1
        best_dist = 0.0
        for c in range(k):
            dot = 0.0
            for d in range(dim):
                dot += unit[c, d] * vectors[i, d]
            dist = 1.0 - dot
            if best < 0 or dist < best_dist:
                best = c
                best_dist = dist
        if best >= 0 and best_dist <= threshold:
            totals[best] += w
            norm = 0.0
            for d in range(dim):
                sums[best, d] += w * vectors[i, d]
                norm += sums[best, d] * sums[best, d]
            norm = sqrt(norm)
            if norm > 0.0:
                for d in range(dim):
                    unit[best, d] = sums[best, d] / norm
            else:
                for d in range(dim):
                    unit[best, d] = vectors[i, d]
            assignments[i] = best
        else:
            totals[k] = w
            for d in range(dim):
                sums[k, d] = w * vectors[i, d]
                unit[k, d] = vectors[i, d]
            assignments[i] = k
            k += 1

    return assignments_arr, unit_arr[:k].copy(), totals_arr[:k].copy()


def lcs_leftmost(long long[:] a, long long[:] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    table_arr = np.zeros((n + 1, m + 1), dtype=np.int32)
    cdef int[:, ::1] table = table_arr
    cdef Py_ssize_t i, j, jj
    cdef int up, left, target
    cdef bint matched

    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                table[i, j] = table[i + 1, j + 1] + 1
            else:
                up = table[i + 1, j]
                left = table[i, j + 1]
                table[i, j] = up if up >= left else left

    pairs = []
    i = 0
    j = 0
    while i < n and j < m and table[i, j] > 0:
        target = table[i, j]
        matched = False
        for jj in range(j, m):
            if b[jj] == a[i] and table[i + 1, jj + 1] + 1 == target:
                pairs.append((i, jj))
                i += 1
                j = jj + 1
                matched = True
                break
        if not matched:
            i += 1
    return pairs
