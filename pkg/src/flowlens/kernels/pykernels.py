"""Pure-Python/numpy implementations of the two hot kernels.

Semantics here are the reference; the compiled twin in _ckernels must agree
exactly on assignments and matches (asserted in tests).
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np


def leader_cluster(
    vectors: np.ndarray, weights: np.ndarray, threshold: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Single-pass leader clustering over unit row vectors.

    Rows are visited in the given order. Each row joins the nearest existing
    cluster when the cosine distance to its centroid is within threshold
    (ties by lowest cluster id), else founds a new one. Centroids are
    weight-weighted running means, renormalized to unit length.

    Returns (assignments (n,), unit centroids (k, dim), cluster weights (k,)).
    """
    n, dim = vectors.shape
    assignments = np.zeros(n, dtype=np.int64)
    sums = np.zeros((n, dim), dtype=np.float64)
    unit = np.zeros((n, dim), dtype=np.float64)
    totals = np.zeros(n, dtype=np.float64)
    k = 0
    for i in range(n):
        v = vectors[i]
        w = weights[i]
        if k:
            dists = 1.0 - unit[:k] @ v
            best = int(np.argmin(dists))  # first minimum: lowest cluster id
            if dists[best] <= threshold:
                sums[best] += w * v
                totals[best] += w
                norm = float(np.linalg.norm(sums[best]))
                unit[best] = sums[best] / norm if norm > 0.0 else v
                assignments[i] = best
                continue
        sums[k] = w * v
        unit[k] = v
        totals[k] = w
        assignments[i] = k
        k += 1
    return assignments, unit[:k].copy(), totals[:k].copy()


def lcs_leftmost(a: np.ndarray, b: np.ndarray) -> List[Tuple[int, int]]:
    """Maximal common subsequence of a and b as (i, j) index pairs.

    Among all maximal matchings, returns the one whose a-indices (and then
    b-indices) are lexicographically smallest: at every position the
    earliest line that can still participate in a maximal matching does.
    """
    n, m = len(a), len(b)
    # suffix table: table[i][j] = LCS length of a[i:] vs b[j:]
    table = np.zeros((n + 1, m + 1), dtype=np.int32)
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                table[i, j] = table[i + 1, j + 1] + 1
            else:
                table[i, j] = max(table[i + 1, j], table[i, j + 1])
    pairs: List[Tuple[int, int]] = []
    i = j = 0
    while i < n and j < m and table[i, j] > 0:
        target = int(table[i, j])
        matched = False
        for jj in range(j, m):
            if b[jj] == a[i] and int(table[i + 1, jj + 1]) + 1 == target:
                pairs.append((i, jj))
                i += 1
                j = jj + 1
                matched = True
                break
        if not matched:
            i += 1
    return pairs
