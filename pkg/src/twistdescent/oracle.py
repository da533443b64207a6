"""Brute-force Selmer computation by exhaustive enumeration.

Ground truth for the matrix pipeline: Sel_phi of the twist by d is the set
of classes supported on the bad places that land in every local Kummer
image.  This module enumerates all of them, one membership test per place,
with no linear algebra shared with the matrix path.
"""
from __future__ import annotations

from dataclasses import dataclass

from .arith import GlobalClass, factor_squarefree, square_class
from .curves import CurveContext, bad_places_of_twist, local_image


class EnumerationGuardError(ValueError):
    """Twist has too many bad places for 2^|T_d| enumeration."""


ENUMERATION_LIMIT = 30


@dataclass(frozen=True)
class SelmerResult:
    dim_phi: int
    dim_phihat: int
    elements_phi: tuple  # GlobalClass basis
    elements_phihat: tuple

    @property
    def u(self):
        return self.dim_phi - self.dim_phihat


def _selmer_group(ctx, d, dual):
    """Dimension and basis of the phi (or dual) Selmer group of twist d.

    Enumerates the group generated by -1 and the finite bad primes of the
    twist; keeps the classes whose restriction lies in the local image at
    every bad place.
    """
    places = bad_places_of_twist(ctx, d)
    if len(places) > ENUMERATION_LIMIT:
        raise EnumerationGuardError(
            f"|T_d| = {len(places)} > {ENUMERATION_LIMIT}"
        )
    gens = [-1] + [v.p for v in places if not v.is_real]
    images = {v: local_image(ctx, d, v, dual=dual).members() for v in places}
    # pack each generator's coordinates at every place into one bit vector
    offsets = {}
    pos = 0
    for v in places:
        offsets[v] = pos
        pos += v.local_dim()
    gen_words = []
    for g in gens:
        w = 0
        for v in places:
            for j, bit in enumerate(square_class(g, v).coords()):
                w |= bit << (offsets[v] + j)
        gen_words.append(w)
    member_words = {}
    for v in places:
        dim = v.local_dim()
        mask = ((1 << dim) - 1) << offsets[v]
        accept = frozenset(
            sum(b << j for j, b in enumerate(m)) << offsets[v]
            for m in images[v]
        )
        member_words[v] = (mask, accept)
    survivors = []
    n = len(gens)
    word = 0
    subset = 0
    for code in range(1 << n):
        # Gray-code walk so each step toggles one generator
        gray = code ^ (code >> 1)
        flip = gray ^ subset
        if flip:
            word ^= gen_words[flip.bit_length() - 1]
            subset = gray
        for v in places:
            mask, accept = member_words[v]
            if word & mask not in accept:
                break
        else:
            survivors.append(subset)
    dim = len(survivors).bit_length() - 1
    assert 1 << dim == len(survivors), "survivors do not form a group"
    basis_subsets = _independent_subset(survivors)
    basis = tuple(
        _to_global(gens, s) for s in basis_subsets
    )
    return dim, basis


def _independent_subset(words):
    pivots = {}
    out = []
    for w in sorted(words):
        r = w
        while r:
            b = r.bit_length() - 1
            if b in pivots:
                r ^= pivots[b]
            else:
                pivots[b] = r
                out.append(w)
                break
    return out


def _to_global(gens, subset):
    val = 1
    for i, g in enumerate(gens):
        if (subset >> i) & 1:
            val *= g
    return GlobalClass.from_int(val)


def selmer_phi(ctx: CurveContext, d) -> SelmerResult:
    """Both Selmer dimensions of the twist by squarefree d, with bases."""
    factor_squarefree(d)  # validates
    dim, basis = _selmer_group(ctx, d, dual=False)
    dim_hat, basis_hat = _selmer_group(ctx, d, dual=True)
    return SelmerResult(
        dim_phi=dim,
        dim_phihat=dim_hat,
        elements_phi=basis,
        elements_phihat=basis_hat,
    )


def selmer_phihat(ctx: CurveContext, d) -> int:
    """Dimension of the dual Selmer group of the twist by d."""
    return selmer_phi(ctx, d).dim_phihat
