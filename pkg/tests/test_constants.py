"""Rank-distribution constants: closed forms, identities, normalization."""
from fractions import Fraction

import pytest

from twistdescent.constants import (
    alpha,
    alpha_prime,
    alpha_prime_table,
    alpha_table,
)


def exact_alpha_prime(p, u, r, terms=64):
    """Oracle: the same product evaluated in exact rational arithmetic."""
    if r < 0 or r + u < 0:
        return Fraction(0)

    def prod(k):
        out = Fraction(1)
        for s in range(1, k + 1):
            out *= 1 - Fraction(1, p**s)
        return out

    return (
        Fraction(1, p ** (r * (r + u)))
        * prod(terms)
        / (prod(r) * prod(r + u))
    )


def test_alpha_prime_200():
    val = alpha_prime(2, 0, 0)
    assert abs(val - 0.2887880951) < 1e-9
    # stable under doubling the truncation point
    assert abs(alpha_prime(2, 0, 0, terms=128) - val) < 1e-12
    assert abs(val - float(exact_alpha_prime(2, 0, 0))) < 1e-15


def test_alpha_prime_201():
    assert abs(alpha_prime(2, 0, 1) - 0.5775761901) < 1e-9
    assert abs(alpha_prime(2, 0, 1) - 2 * alpha_prime(2, 0, 0)) < 1e-15


def test_alpha_prime_negative_u_guard():
    assert alpha_prime(2, 1, -1) == 0
    assert alpha_prime(2, -3, 2) == 0  # r + u < 0
    assert alpha_prime(2, -2, 2) > 0


def test_alpha_prime_rejects():
    with pytest.raises(ValueError):
        alpha_prime(4, 0, 0)
    with pytest.raises(ValueError):
        alpha_prime(2, 0, 0, terms=0)


def test_alpha_prime_matches_exact_oracle():
    for p in (2, 3, 5):
        for u in range(-3, 4):
            for r in range(0, 8):
                got = alpha_prime(p, u, r)
                want = exact_alpha_prime(p, u, r)
                assert abs(got - float(want)) < 1e-15


def test_alpha_examples():
    assert abs(alpha(1, 0) - 0.2887880951) < 1e-9
    assert abs(alpha(2, 0) - 0.5775761901) < 1e-9
    assert alpha(0, 0) == 0


def test_alpha_threshold():
    for u in range(-4, 5):
        thresh = max(1, u + 1)
        for r in range(0, thresh):
            assert alpha(r, u) == 0
        assert alpha(thresh, u) > 0


def test_alpha_normalization():
    for u in range(-4, 5):
        total = sum(alpha(r, u) for r in range(41))
        assert abs(total - 1) < 1e-9, u


def test_alpha_prime_normalization():
    for u in range(0, 5):
        total = sum(alpha_prime(2, u, r) for r in range(41))
        assert abs(total - 1) < 1e-9, u


def test_bridge_identity():
    # alpha(r, u) = alpha_prime(2, -u, r-1), exact up to working precision
    for u in range(-4, 5):
        for r in range(max(1, u + 1), 20):
            lhs = alpha(r, u)
            rhs = alpha_prime(2, -u, r - 1)
            assert abs(lhs - rhs) < 1e-12, (r, u)


def test_reflection_symmetry():
    for u in range(-4, 5):
        for r in range(max(1, u + 1), 20):
            assert abs(alpha(r, u) - alpha(r - u, -u)) < 1e-12, (r, u)


def test_alpha_table():
    t = alpha_table(0, 40)
    assert abs(sum(t.values) - 1) < 1e-9
    assert abs(t.tail) < 1e-9
    assert t.values[0] == 0
    t1 = alpha_table(-1, 40)
    for r in range(1, 30):
        assert abs(t1.values[r] - alpha(r, -1)) == 0


def test_alpha_table_threshold_zeroes():
    for u in (-2, 0, 2):
        t = alpha_table(u, 30)
        for r in range(max(1, u + 1)):
            assert t.values[r] == 0


def test_alpha_table_rejects_small_rmax():
    with pytest.raises(ValueError):
        alpha_table(3, 2)


def test_alpha_prime_table_moments():
    t = alpha_prime_table(2, 0, 40)
    assert abs(t.moment(0) - 1) < 1e-9
    # classical first moment: E[2^nullity] -> 2 for square matrices
    assert abs(t.moment(1) - 2) < 1e-6
