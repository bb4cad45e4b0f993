"""Compiled dynamic-programming kernels for path distances.

Both kernels keep a single rolling row, so memory is O(m) regardless of
path length. They release the GIL and can run from worker threads.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, fastmath=False)
def _dist(p, q, i, j):
    dx = p[i, 0] - q[j, 0]
    dy = p[i, 1] - q[j, 1]
    dz = p[i, 2] - q[j, 2]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True, nogil=True, fastmath=False)
def dtw_kernel(p, q):
    n = p.shape[0]
    m = q.shape[0]
    row = np.empty(m)
    acc = 0.0
    for j in range(m):
        acc += _dist(p, q, 0, j)
        row[j] = acc
    for i in range(1, n):
        diag = row[0]
        row[0] = row[0] + _dist(p, q, i, 0)
        for j in range(1, m):
            up = row[j]
            best = diag
            if up < best:
                best = up
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = _dist(p, q, i, j) + best
            diag = up
    return row[m - 1]


@njit(cache=True, nogil=True, fastmath=False)
def dfd_kernel(p, q):
    n = p.shape[0]
    m = q.shape[0]
    row = np.empty(m)
    acc = 0.0
    for j in range(m):
        d = _dist(p, q, 0, j)
        if d > acc:
            acc = d
        row[j] = acc
    for i in range(1, n):
        diag = row[0]
        d = _dist(p, q, i, 0)
        row[0] = d if d > row[0] else row[0]
        for j in range(1, m):
            up = row[j]
            best = diag
            if up < best:
                best = up
            if row[j - 1] < best:
                best = row[j - 1]
            d = _dist(p, q, i, j)
            row[j] = d if d > best else best
            diag = up
    return row[m - 1]
