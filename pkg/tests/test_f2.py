"""F2 linear algebra: ranks, nullspaces, sampling, nullity distributions."""
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistdescent import f2
from twistdescent.constants import alpha_prime


def brute_rank(rows, n_cols):
    """Oracle: rank as log2 of the size of the row span, by enumeration."""
    span = set()
    for bits in itertools.product((0, 1), repeat=len(rows)):
        v = 0
        for b, r in zip(bits, rows):
            if b:
                v ^= r
        span.add(v)
    return len(span).bit_length() - 1


def bitmatrix(rows, n_cols):
    return f2.BitMatrix.from_rows(rows, n_cols)


def test_rank_identity():
    m = bitmatrix([1 << i for i in range(5)], 5)
    assert f2.rank(m) == 5


def test_rank_zero_matrix():
    m = bitmatrix([0, 0, 0], 7)
    assert f2.rank(m) == 0


def test_rank_dependent_row():
    # third row is the sum of the first two
    m = bitmatrix([[1, 1, 0], [0, 1, 1], [1, 0, 1]], 3)
    assert f2.rank(m) == 2
    assert f2.left_nullity(m) == 1
    assert f2.left_nullspace_basis(m) == [0b111]


def test_left_nullity_trivial_cases():
    assert f2.left_nullity(bitmatrix([1 << i for i in range(5)], 5)) == 0
    assert f2.left_nullity(bitmatrix([0], 2)) == 1


def test_nullspace_identity_empty():
    m = bitmatrix([1, 2], 2)
    assert f2.left_nullspace_basis(m) == []


def test_nullspace_equal_rows():
    m = bitmatrix([0b101, 0b101], 3)
    assert f2.left_nullspace_basis(m) == [0b11]


def test_nullspace_annihilates():
    rng = f2.make_rng(5)
    for _ in range(20):
        m = f2.sample_uniform(9, 6, rng)
        rows = m.row_ints()
        basis = f2.left_nullspace_basis(m)
        assert len(basis) == f2.left_nullity(m)
        for v in basis:
            acc = 0
            for i in range(m.n_rows):
                if (v >> i) & 1:
                    acc ^= rows[i]
            assert acc == 0


@settings(max_examples=60, deadline=None)
@given(
    st.integers(1, 8),
    st.integers(1, 8),
    st.integers(0, 2**32 - 1),
)
def test_rank_matches_brute_force(n, c, seed):
    m = f2.sample_uniform(n, c, f2.make_rng(seed))
    assert f2.rank(m) == brute_rank(m.row_ints(), c)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.data())
def test_rank_invariances(seed, data):
    m = f2.sample_uniform(7, 9, f2.make_rng(seed))
    rows = m.row_ints()
    base = f2.rank(m)
    perm = data.draw(st.permutations(range(7)))
    assert f2.rank(bitmatrix([rows[i] for i in perm], 9)) == base
    # column permutation
    cperm = data.draw(st.permutations(range(9)))
    dense = m.to_dense()[:, cperm]
    assert f2.rank(bitmatrix([list(r) for r in dense], 9)) == base
    # adding one row to another
    i = data.draw(st.integers(0, 6))
    j = data.draw(st.integers(0, 6).filter(lambda x: x != i))
    rows2 = list(rows)
    rows2[i] ^= rows2[j]
    assert f2.rank(bitmatrix(rows2, 9)) == base


def test_rank_plus_nullity():
    rng = f2.make_rng(17)
    for _ in range(30):
        n = int(rng.integers(1, 12))
        c = int(rng.integers(1, 12))
        m = f2.sample_uniform(n, c, rng)
        assert f2.rank(m) + f2.left_nullity(m) == n


def test_rank_does_not_mutate():
    m = f2.sample_uniform(20, 33, f2.make_rng(3))
    before = m.words.copy()
    f2.rank(m)
    f2.left_nullspace_basis(m)
    assert np.array_equal(m.words, before)


def test_backends_agree():
    if f2._f2core is None:
        pytest.skip("compiled kernel not built")
    rng = f2.make_rng(11)
    for _ in range(25):
        n = int(rng.integers(0, 40))
        c = int(rng.integers(0, 80))
        m = f2.sample_uniform(n, c, rng)
        f2.set_backend("python")
        a = f2.rank(m)
        f2.set_backend("cython")
        b = f2.rank(m)
        assert a == b


def test_sample_uniform_empty_and_deterministic():
    m = f2.sample_uniform(0, 0, f2.make_rng(0))
    assert m.n_rows == 0 and m.n_cols == 0
    a = f2.sample_uniform(8, 8, f2.make_rng(42))
    b = f2.sample_uniform(8, 8, f2.make_rng(42))
    assert a == b


def test_sample_uniform_bit_balance():
    # fraction of ones over 10^6 entries is 0.5 within a 3-sigma binomial bound
    rng = f2.make_rng(101)
    total, ones = 0, 0
    for _ in range(100):
        m = f2.sample_uniform(100, 100, rng)
        ones += int(np.unpackbits(m.words.view(np.uint8)).sum())
        total += 100 * 100
    frac = ones / total
    assert abs(frac - 0.5) < 0.005  # 3 sigma = 0.0015


def test_nullity_histogram_1x1():
    h = f2.nullity_histogram(1, 1, 10**5, f2.make_rng(7))
    assert abs(h[0] - 0.5) < 0.01
    assert abs(sum(h.values()) - 1) < 1e-12


def test_nullity_histogram_no_columns():
    h = f2.nullity_histogram(2, 0, 1000, f2.make_rng(1))
    assert h == {2: 1.0}


def test_nullity_histogram_square_limit():
    h = f2.nullity_histogram(200, 200, 10**5, f2.make_rng(12))
    assert abs(h.get(0, 0.0) - 0.288788095) < 0.01


def test_histogram_batch_invariance():
    h1 = f2.nullity_histogram(30, 31, 4000, f2.make_rng(5), batch=64)
    h2 = f2.nullity_histogram(30, 31, 4000, f2.make_rng(5), batch=1000)
    assert h1 == h2


@pytest.mark.parametrize("u", [-2, 0, 2])
def test_nullity_histogram_tv_convergence(u):
    # smaller cousin of the acceptance criterion, u in a reduced range
    h = f2.nullity_histogram(120, 120 + u, 3 * 10**4, f2.make_rng(40 + u))
    ref = [float(alpha_prime(2, u, r)) for r in range(25)]
    assert f2.total_variation(h, ref) <= 0.02


def test_derived_rng_streams_differ():
    a = f2.derived_rng(1, 0).integers(0, 2**63, size=4).tolist()
    b = f2.derived_rng(1, 1).integers(0, 2**63, size=4).tolist()
    c = f2.derived_rng(1, 0).integers(0, 2**63, size=4).tolist()
    assert a != b and a == c
