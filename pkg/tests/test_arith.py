"""Symbols, square classes, factorization: exact values and identities."""
import math
from itertools import product

import pytest

from twistdescent import arith
from twistdescent.arith import (
    REAL_PLACE,
    TWO_PLACE,
    GlobalClass,
    NotSquarefreeError,
    Place,
    RamifiedSymbolError,
    SquareClass,
    factor_squarefree,
    hilbert_additive,
    jacobi,
    legendre_additive,
    odd_place,
    sieve_primes,
    square_class,
    squarefree_coprime_stream,
    sqrt_mod_prime,
    sqrt_mod_prime_power,
)


def hilbert_by_search(a, b, place):
    """Oracle: solvability of z^2 = a x^2 + b y^2 by exhaustive point search.

    Any primitive p-adic solution has x or y a unit, so the two affine
    charts t -> a + b t^2 and t -> b + a t^2 cover everything; the values
    at integer t are integers whose squareness in Q_p is exactly testable.
    For the small coefficients used in tests the solvable locus always
    contains a residue class modulo the scanned range, so the scan is a
    complete decision procedure there.
    """
    if place.is_real:
        return 0 if (a > 0 or b > 0) else 1
    p = place.p
    bound = 2**7 if p == 2 else p**3
    for c0, c1 in ((a, b), (b, a)):
        for t in range(bound):
            val = c0 + c1 * t * t
            if val == 0 or arith.is_square_in_qv(val, place):
                return 0
    return 1


# ---------------------------------------------------------------------------
# Legendre
# ---------------------------------------------------------------------------

def test_legendre_trivial_one():
    for p in (3, 5, 7, 97):
        assert legendre_additive(1, p) == 0


def test_legendre_examples():
    assert legendre_additive(2, 7) == 0  # 3^2 = 2 mod 7
    # squares mod 13 are {1,3,4,9,10,12}; 5 is absent
    assert {x * x % 13 for x in range(1, 13)} == {1, 3, 4, 9, 10, 12}
    assert legendre_additive(5, 13) == 1


def test_legendre_ramified_signals():
    with pytest.raises(RamifiedSymbolError):
        legendre_additive(21, 7)


def test_legendre_multiplicative():
    for p in (11, 37):
        for a in range(1, p):
            for b in range(1, p):
                assert (
                    legendre_additive(a * b, p)
                    == (legendre_additive(a, p) + legendre_additive(b, p)) % 2
                )


def test_quadratic_reciprocity_exhaustive():
    ps = [p for p in sieve_primes(500) if p > 2]
    for i, p in enumerate(ps):
        for q in ps[i + 1 :]:
            lhs = (legendre_additive(p, q) + legendre_additive(q, p)) % 2
            rhs = ((p - 1) // 2) * ((q - 1) // 2) % 2
            assert lhs == rhs, (p, q)


# ---------------------------------------------------------------------------
# Hilbert
# ---------------------------------------------------------------------------

def test_hilbert_one_is_trivial():
    for b in (-5, -1, 2, 3, 30):
        for v in (REAL_PLACE, TWO_PLACE, odd_place(3), odd_place(5)):
            assert hilbert_additive(1, b, v) == 0


def test_hilbert_minus_one_at_infinity():
    assert hilbert_additive(-1, -1, REAL_PLACE) == 1


def test_hilbert_ramified_unit_case():
    # (p, u)_p = 1 for u a non-residue unit; brute-checked at p=3, u=2
    assert hilbert_additive(3, 2, odd_place(3)) == 1
    assert hilbert_by_search(3, 2, odd_place(3)) == 1


def test_hilbert_against_point_search():
    places = [REAL_PLACE, TWO_PLACE, odd_place(3), odd_place(5), odd_place(7)]
    values = [-10, -6, -5, -3, -2, -1, 2, 3, 5, 6, 7, 10, 15]
    for v in places:
        for a in values:
            for b in values:
                assert hilbert_additive(a, b, v) == hilbert_by_search(a, b, v), (
                    a,
                    b,
                    v,
                )


def test_hilbert_symmetric_bimultiplicative():
    vals = [-3, -1, 2, 5, 7, 15]
    for v in (TWO_PLACE, odd_place(3), odd_place(5)):
        for a in vals:
            for b in vals:
                assert hilbert_additive(a, b, v) == hilbert_additive(b, a, v)
                for c in vals:
                    lhs = hilbert_additive(a * b, c, v)
                    rhs = (
                        hilbert_additive(a, c, v) + hilbert_additive(b, c, v)
                    ) % 2
                    assert lhs == rhs


def test_hilbert_product_formula():
    # sum over all relevant places vanishes, for 100 squarefree pairs
    import random

    rnd = random.Random(20240601)
    pool = [d for d in range(2, 1000) if abs(d) > 1]
    count = 0
    while count < 100:
        a = rnd.choice(pool) * rnd.choice((1, -1))
        b = rnd.choice(pool) * rnd.choice((1, -1))
        try:
            _, pa = factor_squarefree(a)
            _, pb = factor_squarefree(b)
        except NotSquarefreeError:
            continue
        count += 1
        places = {REAL_PLACE, TWO_PLACE}
        places |= {Place(p) for p in pa + pb if p != 2}
        total = sum(hilbert_additive(a, b, v) for v in places) % 2
        assert total == 0, (a, b)


# ---------------------------------------------------------------------------
# square classes
# ---------------------------------------------------------------------------

def test_square_class_perfect_square_trivial():
    for v in (REAL_PLACE, TWO_PLACE, odd_place(3), odd_place(7)):
        assert square_class(9, v).is_trivial()


def test_square_class_sign():
    assert square_class(-1, REAL_PLACE) == SquareClass(REAL_PLACE, 1, 0)


def test_square_class_at_odd_prime():
    cls = square_class(12, odd_place(3))
    assert cls.val == 1 and cls.unit == legendre_additive(4, 3) == 0


def test_square_class_multiplicative():
    import random

    rnd = random.Random(7)
    for v in (REAL_PLACE, TWO_PLACE, odd_place(5)):
        for _ in range(200):
            x = rnd.randint(1, 400) * rnd.choice((1, -1))
            y = rnd.randint(1, 400) * rnd.choice((1, -1))
            assert square_class(x * y, v) == square_class(x, v) * square_class(y, v)


def test_square_class_rep_roundtrip():
    for v in (REAL_PLACE, TWO_PLACE, odd_place(3), odd_place(13)):
        dims = v.local_dim()
        for coords in product((0, 1), repeat=dims):
            cls = arith.class_from_coords(v, coords)
            assert cls.coords() == coords
            assert square_class(cls.rep(), v) == cls


def test_two_adic_unit_classes():
    assert square_class(7, TWO_PLACE).unit == 7
    assert square_class(-1, TWO_PLACE).unit == 7
    assert square_class(-3, TWO_PLACE).unit == 5
    assert square_class(17, TWO_PLACE).is_trivial()


# ---------------------------------------------------------------------------
# factorization and streams
# ---------------------------------------------------------------------------

def test_factor_squarefree_basic():
    assert factor_squarefree(1) == (1, ())
    assert factor_squarefree(-30) == (-1, (2, 3, 5))
    with pytest.raises(NotSquarefreeError):
        factor_squarefree(12)
    with pytest.raises(ValueError):
        factor_squarefree(0)


def test_stream_small():
    assert list(squarefree_coprime_stream(3, {2})) == [1, -1, 3, -3]
    got = list(squarefree_coprime_stream(10, {2, 5}))
    assert got == [1, -1, 3, -3, 7, -7]


def test_stream_count_10e4():
    # oracle: direct squarefree count below 10^4 by trial division
    def is_squarefree(n):
        for p in sieve_primes(int(math.isqrt(n))):
            if n % (p * p) == 0:
                return False
        return True

    expected = sum(1 for n in range(1, 10**4 + 1) if is_squarefree(n))
    assert expected == 6083
    got = sum(1 for _ in squarefree_coprime_stream(10**4))
    assert got == 2 * 6083


def test_sqrt_mod_prime():
    for p in (5, 13, 29, 97, 193):
        for a in range(1, p):
            if jacobi(a, p) == 1:
                r = sqrt_mod_prime(a, p)
                assert r * r % p == a


def test_sqrt_mod_prime_power():
    assert pow(sqrt_mod_prime_power(17, 2, 10), 2, 2**10) == 17
    assert pow(sqrt_mod_prime_power(6, 5, 6), 2, 5**6) == 6


def test_global_class():
    g = GlobalClass.from_int(-30)
    assert g.value() == -30
    h = GlobalClass.from_int(15)
    assert (g * h).value() == -2  # -30*15 = -450 = -2 * 15^2
    assert g.restrict(REAL_PLACE).val == 1


def test_is_prime_small():
    assert [p for p in range(50) if arith.is_prime(p)] == sieve_primes(49)
    assert arith.is_prime(2**31 - 1)
    assert not arith.is_prime(2**31 + 1)
