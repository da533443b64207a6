"""Dense F2 linear algebra on bit-packed matrices.

Provides the labeled `BitMatrix` value type plus rank, left nullity, left
nullspace bases, uniform random sampling, and empirical nullity
distributions.  Rows are packed into uint64 words (bit j of word w is
column 64*w + j); elimination uses word-wide XOR so that a 200 x 200 rank
costs microseconds, which the Monte Carlo layers rely on.

Two interchangeable kernels exist: a compiled extension (`_f2core`) and a
pure-Python fallback (`_f2core_py`).  The fastest available one is picked
at import time; see `get_backend` / `set_backend` and bench/benchmark_f2.py.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _f2core_py

try:
    from . import _f2core
except ImportError:  # extension not built; pure-Python fallback
    _f2core = None

_backend = _f2core if _f2core is not None else _f2core_py


def get_backend():
    """Name of the active elimination kernel ('cython' or 'python')."""
    return _backend.BACKEND


def set_backend(name):
    """Force a kernel by name; raises if the compiled one is unavailable."""
    global _backend
    if name == "python":
        _backend = _f2core_py
    elif name == "cython":
        if _f2core is None:
            raise RuntimeError("compiled kernel not available")
        _backend = _f2core
    else:
        raise ValueError(f"unknown backend {name!r}")


def _n_words(n_cols):
    return max(1, (n_cols + 63) // 64)


@dataclass(frozen=True)
class BitMatrix:
    """Dense F2 matrix with row/column labels.

    `words` has shape (n_rows, n_words) and is frozen after construction;
    BitMatrix values are immutable and safe to share between threads.
    """

    n_rows: int
    n_cols: int
    words: np.ndarray
    row_labels: tuple = field(default=())
    col_labels: tuple = field(default=())

    def __post_init__(self):
        if self.words.shape != (self.n_rows, _n_words(self.n_cols)):
            raise ValueError("packed array has the wrong shape")
        if self.row_labels and len(self.row_labels) != self.n_rows:
            raise ValueError("row label count mismatch")
        if self.col_labels and len(self.col_labels) != self.n_cols:
            raise ValueError("column label count mismatch")
        self.words.setflags(write=False)

    @classmethod
    def from_rows(cls, rows, n_cols, row_labels=(), col_labels=()):
        """Build from an iterable of rows given as ints or 0/1 iterables."""
        ints = []
        for r in rows:
            if isinstance(r, int):
                ints.append(r)
            else:
                bits = list(r)
                if len(bits) != n_cols:
                    raise ValueError("row length mismatch")
                ints.append(sum((int(b) & 1) << j for j, b in enumerate(bits)))
        nw = _n_words(n_cols)
        words = np.zeros((len(ints), nw), dtype=np.uint64)
        for i, r in enumerate(ints):
            if r >> n_cols:
                raise ValueError("row has bits beyond n_cols")
            words[i] = np.frombuffer(
                r.to_bytes(8 * nw, "little"), dtype=np.uint64
            )
        return cls(len(ints), n_cols, words,
                   tuple(row_labels), tuple(col_labels))

    def get(self, i, j):
        return int(self.words[i, j >> 6] >> np.uint64(j & 63)) & 1

    def row_int(self, i):
        return int.from_bytes(self.words[i].tobytes(), "little", signed=False)

    def row_ints(self):
        return [self.row_int(i) for i in range(self.n_rows)]

    def to_dense(self):
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.uint8)
        for j in range(self.n_cols):
            out[:, j] = (self.words[:, j >> 6] >> np.uint64(j & 63)) & np.uint64(1)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, BitMatrix)
            and self.n_rows == other.n_rows
            and self.n_cols == other.n_cols
            and np.array_equal(self.words, other.words)
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )


def rank(m: BitMatrix):
    """F2 rank; the input matrix is not mutated (kernel works on a copy)."""
    return _backend.rank_words(m.words, m.n_rows, m.n_cols)


def left_nullity(m: BitMatrix):
    """n_rows - rank(m)."""
    return m.n_rows - rank(m)


def left_nullspace_basis(m: BitMatrix):
    """Independent vectors v (ints over row indices) with v . m = 0."""
    return _f2core_py.nullspace_ints(m.row_ints())


def make_rng(seed):
    """Counter-based deterministic generator (Philox) for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=[seed, 0]))


def derived_rng(seed, *path):
    """Independent substream addressed by (seed, *path); at most 3 indices.

    Streams for distinct paths never overlap: the path is folded into the
    Philox key/counter, so results are reproducible for any worker count.
    """
    if len(path) > 3:
        raise ValueError("at most 3 path indices")
    ids = list(path) + [0] * (3 - len(path))
    bg = np.random.Philox(
        key=[seed & (2**64 - 1), ids[0] & (2**64 - 1)],
        counter=[0, 0, ids[1] & (2**64 - 1), ids[2] & (2**64 - 1)],
    )
    return np.random.Generator(bg)


def _random_words(n_rows, n_cols, rng):
    nw = _n_words(n_cols)
    words = rng.integers(0, 2**64, size=(n_rows, nw), dtype=np.uint64)
    rem = n_cols & 63
    if rem:
        words[:, -1] &= np.uint64((1 << rem) - 1)
    if n_cols == 0:
        words[:] = 0
    return words


def sample_uniform(n_rows, n_cols, rng):
    """Uniform random BitMatrix: each entry is 0/1 with probability 1/2.

    Deterministic given the generator state; pass `make_rng(seed)` or
    `derived_rng(seed, ...)` for reproducibility.
    """
    return BitMatrix(n_rows, n_cols, _random_words(n_rows, n_cols, rng))


def nullity_histogram(n_rows, n_cols, trials, rng, batch=256):
    """Empirical left-nullity distribution over uniform random matrices.

    Returns {nullity: frequency}; frequencies sum to 1.  Computed by
    `trials` independent draws; generation is batched but the stream of
    random words is identical for any batch size.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    nw = _n_words(n_cols)
    rem = n_cols & 63
    counts = {}
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        stack = rng.integers(0, 2**64, size=(b, n_rows, nw), dtype=np.uint64)
        if rem:
            stack[:, :, -1] &= np.uint64((1 << rem) - 1)
        if n_cols == 0:
            stack[:] = 0
        if n_rows == 0:
            nulls = np.zeros(b, dtype=np.int64)
        else:
            nulls = _backend.batch_nullity(stack, n_rows, n_cols)
        for v in nulls:
            counts[int(v)] = counts.get(int(v), 0) + 1
        done += b
    return {k: v / trials for k, v in sorted(counts.items())}


def total_variation(hist, reference):
    """TV distance between a frequency dict and reference[r] probabilities."""
    support = set(hist) | set(range(len(reference)))
    tv = 0.0
    for r in support:
        p = hist.get(r, 0.0)
        q = float(reference[r]) if r < len(reference) else 0.0
        tv += abs(p - q)
    return tv / 2.0
