# cython: boundscheck=False, wraparound=False, cdivision=True
"""Bit-packed F2 elimination kernels (compiled).

Same interface as `_f2core_py`; selected automatically at import by
`twistdescent.f2` when the extension has been built.
"""
import numpy as np

BACKEND = "cython"

ctypedef unsigned long long u64


cdef int _rank_inplace(u64[:, ::1] w, int n_rows, int n_words, int n_cols) nogil:
    cdef int rank = 0
    cdef int col, r, j, pivot, wi
    cdef u64 mask, tmp
    cdef u64* base = &w[0, 0]
    cdef u64* prow
    cdef u64* rrow
    for col in range(n_cols):
        wi = col >> 6
        mask = (<u64>1) << (col & 63)
        pivot = -1
        for r in range(rank, n_rows):
            if base[r * n_words + wi] & mask:
                pivot = r
                break
        if pivot < 0:
            continue
        prow = base + rank * n_words
        if pivot != rank:
            rrow = base + pivot * n_words
            for j in range(n_words):
                tmp = prow[j]
                prow[j] = rrow[j]
                rrow[j] = tmp
        # branchless: mask is all-ones when the row has the pivot bit set
        for r in range(pivot + 1, n_rows):
            rrow = base + r * n_words
            tmp = -((rrow[wi] >> (col & 63)) & 1)
            for j in range(n_words):
                rrow[j] ^= prow[j] & tmp
        rank += 1
        if rank == n_rows:
            break
    return rank


def rank_words(words, int n_rows, int n_cols):
    """F2 rank of a packed uint64 matrix; the input array is not mutated."""
    if n_rows == 0 or n_cols == 0:
        return 0
    scratch = np.array(words[:n_rows], dtype=np.uint64, copy=True, order="C")
    cdef u64[:, ::1] w = scratch
    cdef int n_words = scratch.shape[1]
    with nogil:
        rank = _rank_inplace(w, n_rows, n_words, n_cols)
    return rank


def batch_nullity(batch, int n_rows, int n_cols):
    """Left nullities of a (B, n_rows, n_words) stack of packed matrices."""
    cdef u64[:, :, ::1] src = np.ascontiguousarray(batch, dtype=np.uint64)
    cdef int nb = src.shape[0]
    cdef int n_words = src.shape[2]
    out = np.empty(nb, dtype=np.int64)
    cdef long long[::1] res = out
    scratch = np.empty((n_rows, n_words), dtype=np.uint64)
    cdef u64[:, ::1] w = scratch
    cdef int b, i, j
    if n_rows == 0 or nb == 0:
        out[:] = 0
        return out
    if n_cols == 0:
        out[:] = n_rows
        return out
    with nogil:
        for b in range(nb):
            for i in range(n_rows):
                for j in range(n_words):
                    w[i, j] = src[b, i, j]
            res[b] = n_rows - _rank_inplace(w, n_rows, n_words, n_cols)
    return out
