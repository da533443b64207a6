"""Pure-Python F2 elimination kernels.

Rows are Python ints used as bit vectors; XOR on a big int is a word-wide
operation in CPython, so this is a serviceable fallback when the compiled
extension is unavailable.  The compiled module `_f2core` exposes the same
interface for the hot paths.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def rows_to_ints(words):
    """Rows of a packed uint64 (n_rows, n_words) array as Python ints."""
    n_rows = words.shape[0]
    buf = np.ascontiguousarray(words)
    return [
        int.from_bytes(buf[i].tobytes(), "little", signed=False)
        for i in range(n_rows)
    ]


def rank_ints(rows):
    """F2 rank of rows given as Python ints (input list not mutated)."""
    pivots = {}
    rank = 0
    for r in rows:
        while r:
            b = r.bit_length() - 1
            other = pivots.get(b)
            if other is None:
                pivots[b] = r
                rank += 1
                break
            r ^= other
    return rank


def nullspace_ints(rows):
    """Basis of the left nullspace of rows-as-ints.

    Returns combination vectors as ints over row indices (bit i set means
    row i participates).  Each returned vector has a leading row index not
    used by the others, so the result is linearly independent.
    """
    pivots = {}
    out = []
    for i, r in enumerate(rows):
        combo = 1 << i
        while r:
            b = r.bit_length() - 1
            entry = pivots.get(b)
            if entry is None:
                pivots[b] = (r, combo)
                break
            r ^= entry[0]
            combo ^= entry[1]
        else:
            out.append(combo)
    return out


def rank_words(words, n_rows, n_cols):
    """F2 rank of a packed uint64 matrix; the input array is not mutated."""
    return rank_ints(rows_to_ints(words[:n_rows]))


def batch_nullity(batch, n_rows, n_cols):
    """Left nullities of a (B, n_rows, n_words) stack of packed matrices."""
    out = np.empty(batch.shape[0], dtype=np.int64)
    for b in range(batch.shape[0]):
        out[b] = n_rows - rank_ints(rows_to_ints(batch[b]))
    return out
