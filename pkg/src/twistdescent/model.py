"""Monte Carlo sampler for the idealized symbol distribution.

A random twist with n prime factors is modeled by independent uniform
residues mod D for the primes, a uniform sign, pairwise symbols uniform up
to quadratic reciprocity, and uniform lambda bits on type-1 indices.  The
matrix pipeline consumes these draws exactly as it consumes real twists,
which is what lets the sampled rank distribution be compared against the
closed-form constants.

Every stochastic operation takes an explicit seed; trials use derived
substreams, so results are identical for any worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arith import REAL_PLACE, TWO_PLACE, Place, SquareClass, legendre_additive
from .curves import CurveContext, c_value_from_classes, new_curve
from .f2 import derived_rng
from .pipeline import (
    SymbolOracle,
    condensed_matrix_direct,
    matrix_rank_from_oracle,
    residue_char,
    residue_symbol,
    residue_type,
)
from . import _f2core_py

_STREAM_ALPHA = 0
_STREAM_FULLRANK = 1
_STREAM_TYPES = 2


class InsufficientConditioningError(RuntimeError):
    """No sampled draws matched the requested rank difference."""


def _residue_units(ctx):
    units = [r for r in range(1, ctx.D) if math.gcd(r, ctx.D) == 1]
    return units


def _residue_table(ctx):
    """Per-residue type and symbol data, cached on the curve context."""
    cache = ctx._image_cache.setdefault("_residue_table", {})
    if not cache:
        units = _residue_units(ctx)
        gens = [-1, 2, *ctx.odd_bad_primes]
        for r in units:
            cache[r] = (
                residue_type(ctx, r),
                {g: residue_symbol(ctx, g, r) for g in gens},
            )
        cache["units"] = units
    return cache


class SampledOracle(SymbolOracle):
    """One draw from the symbol distribution, lazily completed.

    Residues and the sign are drawn immediately (they decide the rank
    difference, so rejection sampling can stop early); pair symbols and
    lambda bits are drawn by `finish` only for accepted draws.  The draw
    order within a trial is fixed, so laziness never changes the stream.
    """

    def __init__(self, ctx, n, rng):
        self.ctx = ctx
        self.n = n
        self._rng = rng
        table = _residue_table(ctx)
        units = table["units"]
        idx = rng.integers(0, len(units), size=n)
        self._residues = [units[i] for i in idx]
        self._types = [table[r][0] for r in self._residues]
        self._symbols = [table[r][1] for r in self._residues]
        self._sign = 1 if int(rng.integers(0, 2)) == 0 else -1
        self._pairs = None
        self._lambdas = None

    # -- cheap data available before finish() -------------------------------

    def residue(self, i):
        return self._residues[i]

    def prime_type(self, i):
        return self._types[i]

    def symbol_at(self, g, i):
        return self._symbols[i][g]

    def char_value(self, char, i):
        return residue_char(char, self._residues[i])

    def d_sign(self):
        return self._sign

    def type_counts(self):
        counts = [0, 0, 0, 0]
        for t in self._types:
            counts[t - 1] += 1
        return tuple(counts)

    def d_classes(self):
        """Classes of the modeled twist at the base bad places."""
        out = {REAL_PLACE: SquareClass(REAL_PLACE, 1 if self._sign < 0 else 0, 0)}
        m8 = self._sign % 8
        for r in self._residues:
            m8 = m8 * r % 8
        out[TWO_PLACE] = SquareClass(TWO_PLACE, 0, m8)
        for q in self.ctx.odd_bad_primes:
            v = Place(q)
            rq = self._sign % q
            for r in self._residues:
                rq = rq * r % q
            out[v] = SquareClass(v, 0, legendre_additive(rq, q))
        return out

    def d_class(self, v):
        return self.d_classes()[v]

    # -- the rest of the draw ------------------------------------------------

    def finish(self):
        if self._pairs is not None:
            return
        n = self.n
        bits = self._rng.integers(0, 2, size=n * (n - 1) // 2)
        self._pairs = {}
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                self._pairs[(i, j)] = int(bits[k])
                k += 1
        t1 = [i for i in range(n) if self._types[i] == 1]
        lam = self._rng.integers(0, 2, size=len(t1))
        self._lambdas = {i: int(b) for i, b in zip(t1, lam)}

    def pair(self, i, j):
        self.finish()
        if (i, j) in self._pairs:
            return self._pairs[(i, j)]
        flip = (
            self._symbols[i][-1] * self._symbols[j][-1]
        )  # reciprocity: both = 3 mod 4
        return (self._pairs[(j, i)] + flip) % 2

    def lambda_bit(self, i):
        self.finish()
        return self._lambdas.get(i, 0)


def sample_symbols(ctx: CurveContext, n, rng) -> SampledOracle:
    """One complete draw from the symbol distribution."""
    oracle = SampledOracle(ctx, n, rng)
    oracle.finish()
    return oracle


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------

@dataclass
class AlphaEstimate:
    u: int
    n: int
    trials: int
    accepted: int
    accepted_typed: int  # accepted draws with every type count >= n/10
    histogram: dict  # r -> count, over accepted draws
    histogram_typed: dict

    @property
    def accept_rate(self):
        return self.accepted / self.trials

    def frequencies(self, typed=False):
        hist = self.histogram_typed if typed else self.histogram
        total = self.accepted_typed if typed else self.accepted
        return {r: c / total for r, c in sorted(hist.items())}


def _alpha_chunk(args):
    (A, B, u, n, seed, t0, t1) = args
    ctx = new_curve(A, B)
    hist, hist_t = {}, {}
    accepted = accepted_t = 0
    for t in range(t0, t1):
        rng = derived_rng(seed, _STREAM_ALPHA, t)
        oracle = SampledOracle(ctx, n, rng)
        counts = oracle.type_counts()
        u_draw = (
            c_value_from_classes(ctx, oracle.d_classes())
            + counts[2]
            - counts[1]
        )
        if u_draw != u:
            continue
        r = matrix_rank_from_oracle(ctx, oracle, method="direct")
        accepted += 1
        hist[r] = hist.get(r, 0) + 1
        if all(c >= n / 10 for c in counts):
            accepted_t += 1
            hist_t[r] = hist_t.get(r, 0) + 1
    return accepted, accepted_t, hist, hist_t


def _run_chunked(fn, args_base, trials, workers, chunk=2048):
    """Deterministic chunked map: results merged in a fixed chunk order."""
    chunks = [
        args_base + (t0, min(t0 + chunk, trials))
        for t0 in range(0, trials, chunk)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, chunks))
    return [fn(c) for c in chunks]


def estimate_alpha_n(ctx: CurveContext, u, n, trials, seed, workers=1):
    """Sampled rank distribution conditioned on rank difference u.

    Rejection sampling on the rank difference (no importance weighting);
    returns both the plain estimate and the variant additionally
    conditioned on every type count reaching n/10, with acceptance
    diagnostics.  Raises InsufficientConditioningError when nothing is
    accepted.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    parts = _run_chunked(
        _alpha_chunk, (ctx.A, ctx.B, u, n, seed), trials, workers
    )
    hist, hist_t = {}, {}
    accepted = accepted_t = 0
    for acc, acc_t, h, ht in parts:
        accepted += acc
        accepted_t += acc_t
        for r, c in h.items():
            hist[r] = hist.get(r, 0) + c
        for r, c in ht.items():
            hist_t[r] = hist_t.get(r, 0) + c
    if accepted == 0:
        raise InsufficientConditioningError(
            f"no draws matched u = {u} in {trials} trials"
        )
    return AlphaEstimate(
        u=u,
        n=n,
        trials=trials,
        accepted=accepted,
        accepted_typed=accepted_t,
        histogram=hist,
        histogram_typed=hist_t,
    )


def _fullrank_chunk(args):
    (A, B, n, seed, t0, t1) = args
    ctx = new_curve(A, B)
    buckets = {}
    for t in range(t0, t1):
        rng = derived_rng(seed, _STREAM_FULLRANK, t)
        oracle = sample_symbols(ctx, n, rng)
        counts = oracle.type_counts()
        mhat = condensed_matrix_direct(ctx, oracle)
        upper = [
            mhat.row_int(k)
            for k, lab in enumerate(mhat.row_labels)
            if not (
                isinstance(lab[1], tuple)
                and oracle.prime_type(lab[1][1]) == 3
            )
        ]
        fails = int(len(upper) - _f2core_py.rank_ints(upper) > 0)
        n2 = counts[1]
        tot, bad = buckets.get(n2, (0, 0))
        buckets[n2] = (tot + 1, bad + fails)
    return buckets


def fullrank_probe(ctx: CurveContext, n, trials, seed, workers=1):
    """Failure frequency of the upper block having full row rank.

    The upper block is the condensed matrix without its type-3 rows.
    Returns {n2: (trials_in_bucket, failures)}.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    parts = _run_chunked(
        _fullrank_chunk, (ctx.A, ctx.B, n, seed), trials, workers
    )
    buckets = {}
    for part in parts:
        for n2, (tot, bad) in part.items():
            t0, b0 = buckets.get(n2, (0, 0))
            buckets[n2] = (t0 + tot, b0 + bad)
    return dict(sorted(buckets.items()))


def type_count_probe(n, trials, seed):
    """Frequency that all four type counts exceed n/10.

    Types are uniform over {1,2,3,4} (the residue classes split evenly
    when none of the discriminant classes is a square, which `new_curve`
    guarantees; the per-curve split is tested separately), so the probe
    samples the multinomial directly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = derived_rng(seed, _STREAM_TYPES, 0)
    draws = rng.multinomial(n, [0.25] * 4, size=trials)
    ok = np.all(draws > n / 10, axis=1)
    return float(np.mean(ok))
