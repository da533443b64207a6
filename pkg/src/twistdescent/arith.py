"""Exact arithmetic over Q and its completions.

Legendre/Jacobi symbols (additive, F2-valued), Hilbert symbols at every
place, square-class coordinates in Q_v*/(Q_v*)^2, squarefree factorization
and enumeration.  Everything here is exact integer arithmetic; no floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class RamifiedSymbolError(ArithmeticError):
    """Legendre symbol queried at a prime dividing the argument."""


class NotSquarefreeError(ValueError):
    """Input required to be squarefree is not."""


# ---------------------------------------------------------------------------
# primes and basic residue machinery
# ---------------------------------------------------------------------------

def sieve_primes(limit):
    """All primes <= limit, ascending."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(flags[p * p :: p]))
    return [i for i in range(2, limit + 1) if flags[i]]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin, valid for all 64-bit inputs."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def ord_p(n, p):
    """Exact p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def factor(n):
    """Trial-division factorization of |n| as a dict prime -> exponent."""
    n = abs(n)
    if n == 0:
        raise ValueError("cannot factor zero")
    out = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 7
    # wheel over residues coprime to 30
    steps = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while f * f <= n:
        if n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        else:
            f += steps[i]
            i = (i + 1) % 8
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def factor_squarefree(d):
    """Factor a squarefree integer.

    Returns (sign, primes) with sign in {+1, -1} and primes sorted ascending.
    Raises NotSquarefreeError if some p^2 divides d, ValueError on d = 0.
    """
    if d == 0:
        raise ValueError("d must be nonzero")
    fac = factor(d)
    for p, e in fac.items():
        if e > 1:
            raise NotSquarefreeError(f"{d} is divisible by {p}^2")
    return (1 if d > 0 else -1), tuple(sorted(fac))


def squarefree_kernel(n):
    """The squarefree part of n (same sign, each prime to exponent e mod 2)."""
    if n == 0:
        raise ValueError("squarefree kernel of zero")
    sign = 1 if n > 0 else -1
    out = sign
    for p, e in factor(n).items():
        if e % 2:
            out *= p
    return out


def is_square(n):
    """Whether the integer n is a perfect square."""
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def squarefree_coprime_stream(X, forbidden=()):
    """Squarefree d with 0 < |d| <= X and gcd(d, prod(forbidden)) = 1.

    Yields both signs for each magnitude (positive first), magnitudes
    ascending.  `forbidden` is an iterable of primes.
    """
    if X < 1:
        return
    X = int(X)
    flags = bytearray([1]) * (X + 1)
    for q in range(2, math.isqrt(X) + 1):
        step = q * q
        flags[step::step] = bytearray(len(flags[step::step]))
    for p in set(forbidden):
        flags[p::p] = bytearray(len(flags[p::p]))
    for m in range(1, X + 1):
        if flags[m]:
            yield m
            yield -m


# ---------------------------------------------------------------------------
# Legendre / Jacobi symbols
# ---------------------------------------------------------------------------

def jacobi(a, n):
    """Jacobi symbol (a/n) in {-1, 0, 1}; n odd positive."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be odd positive")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def legendre_additive(a, p):
    """Additive Legendre character of a mod an odd prime p.

    0 for a nonzero quadratic residue, 1 for a non-residue.  Raises
    RamifiedSymbolError when p | a: callers must decide what a ramified
    query means, silent defaults hide bugs.
    """
    if a % p == 0:
        raise RamifiedSymbolError(f"{p} divides {a}")
    return 0 if jacobi(a, p) == 1 else 1


def smallest_nonresidue(p):
    """Smallest positive quadratic non-residue mod the odd prime p."""
    for n in range(2, p):
        if jacobi(n, p) == -1:
            return n
    raise ValueError(f"{p} is not an odd prime")


def sqrt_mod_prime(a, p):
    """Tonelli-Shanks: x with x^2 = a mod p, for an odd prime p; a a QR."""
    a %= p
    if a == 0:
        return 0
    if jacobi(a, p) != 1:
        raise ValueError("not a quadratic residue")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # write p-1 = q 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = smallest_nonresidue(p)
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t * t % p, 1
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def sqrt_mod_prime_power(a, p, k):
    """x with x^2 = a mod p^k for a a unit square mod p (mod 8 if p = 2)."""
    pk = p**k
    if p == 2:
        if a % 8 != 1:
            raise ValueError("not a square unit in Z_2")
        x = 1
        for j in range(3, k):
            if (x * x - a) % (1 << (j + 1)):
                x += 1 << (j - 1)
        return x % pk
    x = sqrt_mod_prime(a, p)
    pj = p
    while pj < pk:
        pj *= p
        # Newton step: x <- x - (x^2 - a) / (2x)
        inv = pow(2 * x, -1, pj)
        x = (x - (x * x - a) * inv) % pj
    return x % pk


# ---------------------------------------------------------------------------
# places and square classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Place:
    """A place of Q: the real place (p = 0), p = 2, or an odd prime."""

    p: int

    @property
    def is_real(self):
        return self.p == 0

    @property
    def is_two(self):
        return self.p == 2

    @property
    def is_odd(self):
        return self.p > 2

    def local_dim(self):
        """F2-dimension of Q_v*/(Q_v*)^2: 1 at the real place, 3 at 2, 2 odd."""
        return 1 if self.is_real else (3 if self.is_two else 2)

    def sort_key(self):
        # ordering convention everywhere: real < 2 < odd primes ascending
        return (self.p if self.p > 2 else (0 if self.p == 0 else 1), self.p)

    def __repr__(self):
        return "oo" if self.is_real else f"p{self.p}"


REAL_PLACE = Place(0)
TWO_PLACE = Place(2)


def odd_place(p):
    if p <= 2 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    return Place(p)


@dataclass(frozen=True)
class SquareClass:
    """An element of Q_v*/(Q_v*)^2 in canonical coordinates.

    real place: val is the sign bit, unit unused (0).
    odd p:      val = ord_p mod 2, unit = additive Legendre bit of unit part.
    p = 2:      val = ord_2 mod 2, unit = unit part mod 8 (one of 1,3,5,7).
    """

    place: Place
    val: int
    unit: int

    def __mul__(self, other):
        if self.place != other.place:
            raise ValueError("classes at different places")
        v = (self.val + other.val) & 1
        if self.place.is_two:
            return SquareClass(self.place, v, self.unit * other.unit % 8)
        return SquareClass(self.place, v, (self.unit + other.unit) & 1)

    def is_trivial(self):
        if self.val:
            return False
        return self.unit == 1 if self.place.is_two else self.unit == 0

    def coords(self):
        """F2 coordinate tuple; length = place.local_dim().

        At 2 the unit coordinates are the two character bits with kernels
        {1,5} and {1,3} mod 8 (in that order).
        """
        if self.place.is_real:
            return (self.val,)
        if self.place.is_two:
            return (self.val, CHI2_BIT[self.unit], CHI2P_BIT[self.unit])
        return (self.val, self.unit)

    def rep(self):
        """Smallest-magnitude integer representative of this class at v."""
        if self.place.is_real:
            return -1 if self.val else 1
        if self.place.is_two:
            return (2 if self.val else 1) * self.unit
        p = self.place.p
        u = smallest_nonresidue(p) if self.unit else 1
        return (p if self.val else 1) * u


# F2 character bits on the units mod 8: kernels {1,5} and {1,3}.
CHI2_BIT = {1: 0, 3: 1, 5: 0, 7: 1}
CHI2P_BIT = {1: 0, 3: 0, 5: 1, 7: 1}


def trivial_class(place):
    return SquareClass(place, 0, 0 if not place.is_two else 1)


def class_from_coords(place, coords):
    """Inverse of SquareClass.coords()."""
    if place.is_real:
        return SquareClass(place, coords[0], 0)
    if place.is_two:
        unit = next(
            u for u in (1, 3, 5, 7) if (CHI2_BIT[u], CHI2P_BIT[u]) == tuple(coords[1:])
        )
        return SquareClass(place, coords[0], unit)
    return SquareClass(place, coords[0], coords[1])


def square_class(x, place):
    """Image of a nonzero rational under Q* -> Q_v*/(Q_v*)^2."""
    if isinstance(x, Fraction):
        num = x.numerator * x.denominator
    else:
        num = int(x)
    if num == 0:
        raise ValueError("square class of zero")
    if place.is_real:
        return SquareClass(place, 1 if num < 0 else 0, 0)
    p = place.p
    v = ord_p(num, p)
    u = num // p**v
    if place.is_two:
        return SquareClass(place, v & 1, u % 8)
    return SquareClass(place, v & 1, legendre_additive(u, p))


def is_square_in_qv(x, place):
    """Whether the nonzero integer/rational x is a square in Q_v."""
    return square_class(x, place).is_trivial()


# ---------------------------------------------------------------------------
# Hilbert symbols
# ---------------------------------------------------------------------------

def _eps(u):
    return (u - 1) // 2 % 2


def _omega(u):
    return (u * u - 1) // 8 % 2


def hilbert_additive(a, b, place):
    """Additive Hilbert symbol (a,b)_v in F2.

    0 iff z^2 = a x^2 + b y^2 has a nontrivial Q_v-point.  Computed by the
    standard closed form in valuations and unit classes; the point-search
    definition stays in the test suite as an oracle.
    """
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of zero")
    a = a.numerator * a.denominator if isinstance(a, Fraction) else int(a)
    b = b.numerator * b.denominator if isinstance(b, Fraction) else int(b)
    if place.is_real:
        return 1 if (a < 0 and b < 0) else 0
    p = place.p
    al, be = ord_p(a, p), ord_p(b, p)
    u, w = a // p**al, b // p**be
    if place.is_two:
        return (_eps(u) * _eps(w) + al * _omega(w) + be * _omega(u)) % 2
    ubit = legendre_additive(u, p)
    wbit = legendre_additive(w, p)
    return (al * be * _eps(p) + al * wbit + be * ubit) % 2


def hilbert_class_pairing(c1: SquareClass, c2: SquareClass):
    """Hilbert pairing of two square classes at the same place."""
    if c1.place != c2.place:
        raise ValueError("classes at different places")
    return hilbert_additive(c1.rep(), c2.rep(), c1.place)


# ---------------------------------------------------------------------------
# global square classes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GlobalClass:
    """A class in Q*/(Q*)^2, i.e. a signed squarefree integer."""

    sign: int
    two_exponent: int
    odd_primes: frozenset

    @classmethod
    def from_int(cls, d):
        sign, primes = factor_squarefree(d)
        return cls(sign, int(2 in primes), frozenset(p for p in primes if p != 2))

    def value(self):
        out = self.sign * (2 if self.two_exponent else 1)
        for p in self.odd_primes:
            out *= p
        return out

    def __mul__(self, other):
        return GlobalClass(
            self.sign * other.sign,
            self.two_exponent ^ other.two_exponent,
            self.odd_primes ^ other.odd_primes,
        )

    def restrict(self, place):
        return square_class(self.value(), place)
