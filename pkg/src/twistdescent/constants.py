"""Cohen-Lenstra u-probabilities and the limiting twist rank distribution.

`alpha_prime(p, u, r)` is the u-probability that a random p-group has rank
r; `alpha(r, u)` is the limiting probability that the Selmer rank of a
twist equals r on the stratum where the rank difference is u.  The two are
related by alpha(r, u) = alpha_prime(2, -u, r - 1), which the test suite
checks digit for digit.

All values are evaluated in binary floating point with 96 significand
bits (mpmath); infinite products are truncated at `terms` factors, so the
tail error is below 2^-60 for terms >= 64.
"""
from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .arith import is_prime

PRECISION_BITS = 96
DEFAULT_TERMS = 64


def _finite_product(p, k):
    """prod_{s=1}^{k} (1 - p^-s); exact semantics at working precision."""
    out = mpf(1)
    for s in range(1, k + 1):
        out *= 1 - mpf(p) ** (-s)
    return out


def alpha_prime(p, u, r, terms=DEFAULT_TERMS):
    """u-probability that a random p-group has rank r.

    p^-r(r+u) prod_inf (1-p^-s) / (prod_1^r (1-p^-s) prod_1^{r+u} (1-p^-s))
    when r >= 0 and r + u >= 0, and 0 otherwise.  The r + u >= 0 guard is
    what makes the formula well defined for u <= 0 (the finite products
    need nonnegative upper limits).
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if r < 0 or r + u < 0:
        return mpf(0)
    with mp.workprec(PRECISION_BITS):
        inf_prod = _finite_product(p, terms)
        num = mpf(p) ** (-r * (r + u)) * inf_prod
        den = _finite_product(p, r) * _finite_product(p, r + u)
        return num / den


def alpha(r, u, terms=DEFAULT_TERMS):
    """Limiting probability of Selmer rank r given rank difference u.

    2^-(r-1)(r-u-1) prod_inf (1-2^-s) /
        (prod_1^{r-1} (1-2^-s) prod_1^{r-u-1} (1-2^-s))
    for r >= max(1, u+1), and 0 below that threshold.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    if r < max(1, u + 1):
        return mpf(0)
    with mp.workprec(PRECISION_BITS):
        inf_prod = _finite_product(2, terms)
        num = mpf(2) ** (-(r - 1) * (r - u - 1)) * inf_prod
        den = _finite_product(2, r - 1) * _finite_product(2, r - u - 1)
        return num / den


@dataclass(frozen=True)
class AlphaTable:
    """Bulk evaluation of a rank distribution up to r_max.

    `values[r]` is the probability of rank r; `tail` is 1 - sum(values),
    the mass beyond r_max (decays like 2^-r^2).  `p` is None for the twist
    distribution and the prime for a u-probability table.
    """

    u: int
    r_max: int
    values: tuple
    tail: float
    p: int | None = None

    def __post_init__(self):
        assert all(0 <= v <= 1 for v in self.values)
        total = mpf(0)
        for v in self.values:
            total += v
            assert total <= 1 + mpf(10) ** -9

    def moment(self, k):
        """sum_r 2^{kr} values[r] (the k-th moment of 2^rank)."""
        with mp.workprec(PRECISION_BITS):
            return sum(mpf(2) ** (k * r) * v for r, v in enumerate(self.values))


def alpha_table(u, r_max, terms=DEFAULT_TERMS):
    """AlphaTable of alpha(r, u) for 0 <= r <= r_max."""
    if r_max < max(1, u + 1):
        raise ValueError("r_max below the support threshold")
    values = tuple(alpha(r, u, terms) for r in range(r_max + 1))
    with mp.workprec(PRECISION_BITS):
        tail = 1 - sum(values)
    return AlphaTable(u=u, r_max=r_max, values=values, tail=float(tail))


def alpha_prime_table(p, u, r_max, terms=DEFAULT_TERMS):
    """AlphaTable of alpha_prime(p, u, r) for 0 <= r <= r_max."""
    values = tuple(alpha_prime(p, u, r, terms) for r in range(r_max + 1))
    with mp.workprec(PRECISION_BITS):
        tail = 1 - sum(values)
    return AlphaTable(u=u, r_max=r_max, values=values, tail=float(tail), p=p)
