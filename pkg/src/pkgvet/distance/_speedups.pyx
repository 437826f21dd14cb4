# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled edit distance kernel; same contract as _fallback."""

from cpython.mem cimport PyMem_Malloc, PyMem_Free


def edit_distance(str a, str b) -> int:
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef Py_ssize_t inf = la + lb
    cdef Py_ssize_t rows = la + 2, cols = lb + 2
    cdef Py_ssize_t *d = <Py_ssize_t *> PyMem_Malloc(rows * cols * sizeof(Py_ssize_t))
    if d == NULL:
        raise MemoryError()
    cdef dict last_row = {}
    cdef Py_ssize_t i, j, k, l, cost, last_col, best, cand
    cdef Py_UCS4 ch_a, ch_b
    try:
        d[0] = inf
        for i in range(la + 1):
            d[(i + 1) * cols + 0] = inf
            d[(i + 1) * cols + 1] = i
        for j in range(lb + 1):
            d[0 * cols + j + 1] = inf
            d[1 * cols + j + 1] = j
        for i in range(1, la + 1):
            ch_a = a[i - 1]
            last_col = 0
            for j in range(1, lb + 1):
                ch_b = b[j - 1]
                k = last_row.get(ch_b, 0)
                l = last_col
                if ch_a == ch_b:
                    cost = 0
                    last_col = j
                else:
                    cost = 1
                best = d[i * cols + j] + cost
                cand = d[(i + 1) * cols + j] + 1
                if cand < best:
                    best = cand
                cand = d[i * cols + j + 1] + 1
                if cand < best:
                    best = cand
                cand = d[k * cols + l] + (i - k - 1) + 1 + (j - l - 1)
                if cand < best:
                    best = cand
                d[(i + 1) * cols + j + 1] = best
            last_row[ch_a] = i
        return d[(la + 1) * cols + lb + 1]
    finally:
        PyMem_Free(d)
