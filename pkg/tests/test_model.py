"""Sampled symbol distribution and its estimators."""
import numpy as np
import pytest

from twistdescent import _f2core_py
from twistdescent.constants import alpha
from twistdescent.curves import c_value_from_classes, new_curve
from twistdescent.f2 import derived_rng, total_variation
from twistdescent.model import (
    InsufficientConditioningError,
    SampledOracle,
    estimate_alpha_n,
    fullrank_probe,
    sample_symbols,
    type_count_probe,
)
from twistdescent.oracle import selmer_phi
from twistdescent.pipeline import (
    condense,
    condensed_matrix_direct,
    matrix_rank_from_oracle,
    presentation_matrix,
    sort_to_block_order,
)


@pytest.fixture(scope="module")
def ctx():
    return new_curve(1, -1)


def test_sampling_deterministic(ctx):
    a = sample_symbols(ctx, 12, derived_rng(3, 0, 0))
    b = sample_symbols(ctx, 12, derived_rng(3, 0, 0))
    assert a._residues == b._residues
    assert a._sign == b._sign
    assert a._pairs == b._pairs and a._lambdas == b._lambdas


def test_zero_prime_draw_matches_unit_twist(ctx):
    # n = 0 collapses to the twist by +-1
    for t in range(8):
        oracle = sample_symbols(ctx, 0, derived_rng(9, 1, t))
        d = oracle.d_sign()
        assert matrix_rank_from_oracle(ctx, oracle) == selmer_phi(ctx, d).dim_phi


def test_reciprocity_constraint(ctx):
    oracle = sample_symbols(ctx, 15, derived_rng(4, 2, 0))
    for i in range(15):
        for j in range(15):
            if i == j:
                continue
            lhs = (oracle.pair(i, j) + oracle.pair(j, i)) % 2
            rhs = oracle.symbol_at(-1, i) * oracle.symbol_at(-1, j)
            assert lhs == rhs % 2


def test_lambda_only_on_type1(ctx):
    oracle = sample_symbols(ctx, 30, derived_rng(4, 3, 0))
    assert set(oracle._lambdas) == {
        i for i in range(30) if oracle.prime_type(i) == 1
    }


def test_type_fractions(ctx):
    # mean type frequencies over many draws: 1/4 each within 0.01
    totals = np.zeros(4)
    draws = 10**5 // 40
    for t in range(draws):
        oracle = SampledOracle(ctx, 40, derived_rng(8, 4, t))
        totals += oracle.type_counts()
    fracs = totals / (40 * draws)
    assert np.all(np.abs(fracs - 0.25) < 0.01)


def test_dimension_identity_per_draw(ctx):
    for t in range(120):
        oracle = sample_symbols(ctx, 14, derived_rng(2, 5, t))
        counts = oracle.type_counts()
        u = (
            c_value_from_classes(ctx, oracle.d_classes())
            + counts[2]
            - counts[1]
        )
        mhat = condensed_matrix_direct(ctx, oracle)
        assert mhat.n_rows - mhat.n_cols == u, t


def test_two_paths_agree_on_samples(ctx):
    for t in range(60):
        oracle = sample_symbols(ctx, 10, derived_rng(6, 6, t))
        direct = condensed_matrix_direct(ctx, oracle)
        cond, _ = condense(presentation_matrix(ctx, oracle), ctx)
        ordered = sort_to_block_order(cond, oracle)
        assert ordered.to_dense().tolist() == direct.to_dense().tolist(), t


def test_estimate_alpha_converges(ctx):
    est = estimate_alpha_n(ctx, 0, 40, 40000, seed=501)
    assert est.accepted >= 2000
    ref = [float(alpha(r, 0)) for r in range(25)]
    assert total_variation(est.frequencies(), ref) < 0.05
    # plain and type-conditioned estimates nearly coincide at this n
    diff = 0.0
    freq, freq_t = est.frequencies(), est.frequencies(typed=True)
    for r in set(freq) | set(freq_t):
        diff = max(diff, abs(freq.get(r, 0) - freq_t.get(r, 0)))
    assert diff < 0.05


def test_estimate_support_respects_threshold(ctx):
    for u in (-1, 0, 1):
        est = estimate_alpha_n(ctx, u, 24, 6000, seed=77 + u)
        assert min(est.histogram) >= max(1, u + 1)


def test_estimate_rejects_impossible_u(ctx):
    with pytest.raises(InsufficientConditioningError):
        estimate_alpha_n(ctx, 40, 10, 200, seed=1)


def test_estimate_worker_invariance(ctx):
    a = estimate_alpha_n(ctx, 0, 16, 3000, seed=42, workers=1)
    b = estimate_alpha_n(ctx, 0, 16, 3000, seed=42, workers=2)
    assert a == b


def test_fullrank_probe_small_buckets(ctx):
    buckets = fullrank_probe(ctx, 40, 3000, seed=31)
    assert sum(t for t, _ in buckets.values()) == 3000
    # failure rate decays with the type-2 count: compare small vs large
    small = [(t, b) for n2, (t, b) in buckets.items() if n2 <= 4]
    large = [(t, b) for n2, (t, b) in buckets.items() if n2 >= 10]
    rate = lambda rows: sum(b for _, b in rows) / max(1, sum(t for t, _ in rows))
    assert rate(large) <= rate(small) + 0.02
    assert rate(large) <= 0.02


def test_fullrank_probe_zero_primes(ctx):
    buckets = fullrank_probe(ctx, 0, 50, seed=3)
    assert list(buckets) == [0]


def test_type_count_probe_values():
    assert type_count_probe(100, 10**4, seed=5) >= 0.99
    small = type_count_probe(4, 10**4, seed=6)
    assert 0 < small < 0.35  # needs one prime of each type: 4!/4^4 = 3/32
    # monotone trend within noise
    seq = [type_count_probe(n, 4000, seed=7) for n in (20, 60, 120)]
    assert seq[0] <= seq[1] + 0.05 and seq[1] <= seq[2] + 0.05


def test_block_reduction_equivalence(ctx):
    # conditioned on the upper block having full rank, the nullity of the
    # condensed matrix matches the nullity of a uniform matrix with the
    # type-3 shape
    n = 60
    hist_m, hist_u = {}, {}
    kept = 0
    for t in range(8000):
        rng = derived_rng(88, 9, t)
        oracle = sample_symbols(ctx, n, rng)
        counts = oracle.type_counts()
        mhat = condensed_matrix_direct(ctx, oracle)
        rows = mhat.row_ints()
        upper = [
            r
            for r, lab in zip(rows, mhat.row_labels)
            if not (
                isinstance(lab[1], tuple)
                and oracle.prime_type(lab[1][1]) == 3
            )
        ]
        if len(upper) - _f2core_py.rank_ints(upper) != 0:
            continue
        kept += 1
        null = mhat.n_rows - _f2core_py.rank_ints(rows)
        hist_m[null] = hist_m.get(null, 0) + 1
        n3 = counts[2]
        u = mhat.n_rows - mhat.n_cols
        bits = rng.integers(0, 2, size=(n3, max(0, n3 - u)))
        ints = [
            sum(int(b) << k for k, b in enumerate(row)) for row in bits
        ]
        null_u = n3 - _f2core_py.rank_ints(ints)
        hist_u[null_u] = hist_u.get(null_u, 0) + 1
    assert kept > 6000
    fm = {k: v / kept for k, v in hist_m.items()}
    support = max(max(fm, default=0), max(hist_u, default=0)) + 1
    fu = [hist_u.get(r, 0) / kept for r in range(support)]
    assert total_variation(fm, fu) <= 0.02
