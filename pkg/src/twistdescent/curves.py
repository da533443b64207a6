"""Curve validation, prime classification, and local Kummer images.

A curve y^2 = x^3 + A x^2 + B x with (0,0) of order two carries a degree-2
isogeny phi to y^2 = x^3 - 2A x^2 + (A^2-4B) x.  For each place v and twist
d, `local_image` computes the image W_v^d of the local Kummer map inside
Q_v*/(Q_v*)^2: closed forms at primes dividing d away from the bad set,
solvability of the quartic homogeneous spaces everywhere else.
`tamagawa_ord2` is the resulting 2-valuation of |Sel_phi|/|Sel_phihat|.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .arith import (
    REAL_PLACE,
    TWO_PLACE,
    Place,
    SquareClass,
    class_from_coords,
    factor,
    factor_squarefree,
    is_square,
    is_square_in_qv,
    jacobi,
    legendre_additive,
    ord_p,
    square_class,
    squarefree_kernel,
    sqrt_mod_prime,
    sqrt_mod_prime_power,
)


class CurveError(ValueError):
    """The pair (A, B) violates a hypothesis; message names which one."""


class SingularCurveError(CurveError):
    pass


class FullTwoTorsionError(CurveError):
    pass


class FourIsogenyError(CurveError):
    pass


@dataclass(frozen=True)
class LocalSubgroup:
    """A subgroup of Q_v*/(Q_v*)^2 given by a basis of square classes."""

    place: Place
    basis: tuple

    @property
    def dim(self):
        return len(self.basis)

    def members(self):
        """All coordinate tuples in the span (ambient dim <= 3)."""
        out = set()
        dims = self.place.local_dim()
        for bits in itertools.product((0, 1), repeat=len(self.basis)):
            acc = (0,) * dims
            for b, cls in zip(bits, self.basis):
                if b:
                    acc = tuple(x ^ y for x, y in zip(acc, cls.coords()))
            out.add(acc)
        return frozenset(out)

    def contains(self, cls: SquareClass):
        return cls.coords() in self.members()


def _subgroup_from_coords(place, coord_set):
    """LocalSubgroup with a reduced-echelon basis, valuation bit first.

    The RREF pivot order puts the valuation coordinate first so that at
    most one basis element has odd valuation, which the matrix layer
    requires of its row bases.
    """
    rows = [list(c) for c in coord_set if any(c)]
    dims = place.local_dim()
    basis = []
    for col in range(dims):
        pivot = next((r for r in rows if r[col]), None)
        if pivot is None:
            continue
        rows = [
            [x ^ y for x, y in zip(r, pivot)] if r[col] else r
            for r in rows
            if r is not pivot
        ]
        basis = [
            [x ^ y for x, y in zip(b, pivot)] if b[col] else b for b in basis
        ]
        basis.append(pivot)
        rows = [r for r in rows if any(r)]
    return LocalSubgroup(
        place, tuple(class_from_coords(place, tuple(b)) for b in basis)
    )


@dataclass
class CurveContext:
    """Validated curve data with cached local computations.

    The caches behave as thread-safe memos: lookups and inserts of
    identical values may race benignly (values are deterministic).
    """

    A: int
    B: int
    delta_full: int  # A^2 - 4B
    delta: int  # squarefree kernel of A^2 - 4B
    delta_prime: int  # squarefree kernel of B
    disc: int  # 16 B^2 (A^2 - 4B)
    places: tuple  # T: places dividing 2 * disc * infinity, sorted
    odd_bad_primes: tuple
    D: int  # 8 * (product of odd primes dividing disc)
    _image_cache: dict = field(default_factory=dict, repr=False)
    _sqrtB: dict = field(default_factory=dict, repr=False)
    _sqrt_delta: dict = field(default_factory=dict, repr=False)

    @property
    def coprimality_modulus(self):
        """Primes a twist must avoid for the matrix path: 2 and odd bad ones."""
        out = 2
        for p in self.odd_bad_primes:
            out *= p
        return out

    def sqrt_B_mod(self, p):
        if p not in self._sqrtB:
            self._sqrtB[p] = sqrt_mod_prime(self.B % p, p)
        return self._sqrtB[p]

    def sqrt_delta_mod(self, p):
        if p not in self._sqrt_delta:
            self._sqrt_delta[p] = sqrt_mod_prime(self.delta_full % p, p)
        return self._sqrt_delta[p]


def new_curve(A, B):
    """Validate (A, B) and build a CurveContext, or raise a CurveError."""
    A, B = int(A), int(B)
    delta_full = A * A - 4 * B
    if B == 0 or delta_full == 0:
        raise SingularCurveError(
            f"(A,B)=({A},{B}): B = 0 or A^2 = 4B makes the curve singular"
        )
    delta = squarefree_kernel(delta_full)
    delta_prime = squarefree_kernel(B)
    if delta == 1:
        raise FullTwoTorsionError(
            f"(A,B)=({A},{B}): A^2-4B is a square, the curve has full "
            "rational 2-torsion"
        )
    if delta_prime == 1 or squarefree_kernel(delta * delta_prime) == 1:
        raise FourIsogenyError(
            f"(A,B)=({A},{B}): B or B(A^2-4B) is a square, the curve has a "
            "cyclic 4-isogeny over the 2-division field"
        )
    disc = 16 * B * B * delta_full
    odd_bad = tuple(sorted(p for p in factor(disc) if p > 2))
    places = (REAL_PLACE, TWO_PLACE) + tuple(Place(p) for p in odd_bad)
    D = 8
    for p in odd_bad:
        D *= p
    return CurveContext(
        A=A,
        B=B,
        delta_full=delta_full,
        delta=delta,
        delta_prime=delta_prime,
        disc=disc,
        places=places,
        odd_bad_primes=odd_bad,
        D=D,
    )


def twist_curve(ctx: CurveContext, m):
    """Context of the quadratic twist by m: y^2 = x^3 + Am x^2 + Bm^2 x."""
    return new_curve(ctx.A * m, ctx.B * m * m)


def classify_prime(ctx: CurveContext, p):
    """Type 1..4 of an odd prime p coprime to the bad set.

    Types by the Legendre pair ((delta/p), (delta'/p)):
    (1,1) -> 1, (1,-1) -> 2, (-1,1) -> 3, (-1,-1) -> 4.
    """
    if p == 2 or 2 * ctx.disc % p == 0:
        raise ValueError(f"{p} divides twice the discriminant")
    a = jacobi(ctx.delta_full, p)
    b = jacobi(ctx.B, p)
    return {(1, 1): 1, (1, -1): 2, (-1, 1): 3, (-1, -1): 4}[(a, b)]


# ---------------------------------------------------------------------------
# quartic homogeneous spaces
# ---------------------------------------------------------------------------
#
# For the twist by d of the curve with coefficients (a, b), the class c lies
# in the image of the local Kummer map iff
#     c w^2 = c^2 u^4 - 2 a d c u^2 t^2 + (a^2 - 4b) d^2 t^4
# has a nontrivial Q_v point.  phi uses (a, b) = (A, B); the dual isogeny
# uses (a, b) = (-2A, A^2 - 4B).

def _poly_eval(coeffs, x):
    out = 0
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _clear_square_content(coeffs, p):
    """Divide out the largest even power of p from the content.

    Square factors do not change whether values are squares, and a large
    content otherwise forces the refinement search to expand every residue
    class for the first ord(content)/2 levels.
    """
    e = min(ord_p(c, p) for c in coeffs if c)
    e -= e % 2
    if e:
        q = p**e
        coeffs = [c // q for c in coeffs]
    return coeffs


def _exists_square_value(coeffs, p, first_level, kmax):
    """Whether q(x) is a nonzero square (or zero) in Q_p for some x in Z_p.

    q is given by integer coefficients.  Branch-and-refine on residue
    classes: a value whose valuation is small relative to the class radius
    has constant square class over the whole class, so it is decided
    exactly; otherwise the class splits.  Values are only needed modulo
    p^(k + gap + 1), which keeps the arithmetic bounded.  Assumes q has no
    root in the searched region (callers dispose of roots algebraically
    first), which makes the refinement terminate; kmax is a failsafe.
    """
    stable_gap = 3 if p == 2 else 1
    level = list(first_level)
    k = 1
    while level:
        if k > kmax:
            raise AssertionError(
                "local solvability search exceeded its precision bound"
            )
        nxt = []
        pk = p**k
        prec = pk * p**stable_gap  # p^(k + gap); ord < k + gap once decided
        cmod = [c % (prec * p) for c in coeffs]
        for x0 in level:
            val = _poly_eval(cmod, x0) % (prec * p)
            if val == 0:
                # valuation beyond working precision: refine further
                nxt.extend(x0 + j * pk for j in range(p))
                continue
            v = 0
            t = val
            while t % p == 0:
                t //= p
                v += 1
            if v + stable_gap <= k:
                # square class constant on this residue class: decide now
                if v % 2 == 0 and (
                    (p == 2 and t % 8 == 1) or (p > 2 and jacobi(t, p) == 1)
                ):
                    return True
            else:
                nxt.extend(x0 + j * pk for j in range(p))
        level = nxt
        k += 1
    return False


def _torsor_solvable(a, b, d, c, place):
    """Q_v-solvability of c w^2 = c^2 u^4 - 2adc u^2t^2 + (a^2-4b) d^2 t^4."""
    disc4 = a * a - 4 * b
    if place.is_real:
        if c > 0:
            return True
        # need the quartic form to take a value <= 0: minimize over s >= 0
        # the quadratic s^2 + 2 a d s + disc4 d^2 (sign of c divided out)
        if a * d <= 0:
            return b > 0
        return disc4 < 0
    p = place.p
    # points with w = 0: (u/t)^2 = d(a +- 2 sqrt(b))/c over Q_p
    if is_square_in_qv(b, place):
        prec = ord_p(4 * b * disc4 * d * d * c * c, p) + 8
        pk = p**prec
        s = _sqrt_in_zp(b, p, prec)
        for root in (s, pk - s):
            t = d * (a + 2 * root) % pk
            # t is sqrt-precision-limited; its valuation is < prec by the
            # factorization (a+2s)(a-2s) = disc4, so the class is exact
            if t == 0:
                continue
            v = ord_p(t, p)
            unit = t // p**v
            cls_val = v & 1
            if p == 2:
                tc = SquareClass(place, cls_val, unit % 8)
            else:
                tc = SquareClass(place, cls_val, legendre_additive(unit, p))
            if (tc * square_class(c, place)).is_trivial():
                return True
    # points with w != 0, via the two charts
    kmax = ord_p(4096 * c**4 * d**4 * disc4**2 * b * b, p) + 24
    chart1 = [c * disc4 * d * d, 0, -2 * a * d * c * c, 0, c**3]
    if _exists_square_value(_clear_square_content(chart1, p), p, range(p), kmax):
        return True
    # second chart: u = 1, t = p z
    chart2 = [c**3, 0, -2 * a * d * c * c * p * p, 0, c * disc4 * d * d * p**4]
    return _exists_square_value(_clear_square_content(chart2, p), p, range(p), kmax)


def _sqrt_in_zp(b, p, prec):
    """A square root of the square b in Z_p, modulo p^prec."""
    v = ord_p(b, p)
    u = b // p**v
    root_u = sqrt_mod_prime_power(u % p**prec, p, prec)
    return root_u * p ** (v // 2) % p**prec


def _image_by_search(ctx, place, d_rep, dual):
    """W_v as the set of locally solvable classes, by full enumeration."""
    a, b = (-2 * ctx.A, ctx.delta_full) if dual else (ctx.A, ctx.B)
    coords = []
    for bits in itertools.product((0, 1), repeat=place.local_dim()):
        cls = class_from_coords(place, bits)
        if _torsor_solvable(a, b, d_rep, cls.rep(), place):
            coords.append(bits)
    member_set = set(map(tuple, coords))
    # the image of a group morphism is a group; a failure here means the
    # solvability search mis-decided some class
    for x in member_set:
        for y in member_set:
            assert (
                tuple(i ^ j for i, j in zip(x, y)) in member_set
            ), f"local image not closed under products at {place}"
    tors = ctx.delta_full if not dual else 16 * ctx.B
    assert square_class(tors * d_rep * d_rep, place).coords() in member_set
    return _subgroup_from_coords(place, member_set)


def local_image(ctx: CurveContext, d, v: Place, dual=False):
    """Image W_v^d of the local Kummer map for the twist by d at v.

    v must belong to T_d (the bad places of the twisted curve).  At primes
    p | d coprime to the bad set the closed form by prime type is used; at
    the places of T the quartic-solvability search runs on a canonical
    representative of the class of d at v, and results are cached per
    (place, class of d, isogeny side).
    """
    d_cls = square_class(d, v)
    if not v.is_real and v.p not in (2, *ctx.odd_bad_primes):
        p = v.p
        if d % p != 0:
            raise ValueError(f"{v} is not a bad place for the twist by {d}")
        return _twisted_prime_image(ctx, d_cls, p, dual)
    return _orig_place_image(ctx, v, d_cls, dual)


def local_image_dual(ctx: CurveContext, d, v: Place):
    """Local image for the dual isogeny (coefficients (-2A, A^2-4B))."""
    return local_image(ctx, d, v, dual=True)


def _twisted_prime_image(ctx, d_cls, p, dual):
    """Closed-form W_p^d at p | d away from the bad set, keyed by type."""
    key = (p, d_cls, dual)
    cached = ctx._image_cache.get(key)
    if cached is not None:
        return cached
    t = classify_prime(ctx, p)
    place = Place(p)
    if dual:
        # the dual curve swaps the roles of the two discriminant classes
        t = {1: 1, 2: 3, 3: 2, 4: 4}[t]
        a, base_b, tors = -2 * ctx.A, ctx.delta_full, 16 * ctx.B
    else:
        a, base_b, tors = ctx.A, ctx.B, ctx.delta_full
    if t == 2:
        sub = LocalSubgroup(place, ())
    elif t == 4:
        sub = LocalSubgroup(place, (square_class(tors, place),))
    else:
        s = sqrt_mod_prime(base_b % p, p)
        gen_unit = (a + 2 * s) % p
        # class of d * (a + 2 sqrt(b)): odd valuation, unit part from the
        # cofactor of p in d times a+2s
        unit_bit = (d_cls.unit + legendre_additive(gen_unit, p)) % 2
        gen = SquareClass(place, 1, unit_bit)
        if t == 1:
            sub = LocalSubgroup(place, (gen,))
        else:  # type 3: the full local group, basis {torsion class, gen}
            sub = LocalSubgroup(place, (square_class(tors, place), gen))
    ctx._image_cache[key] = sub
    return sub


def _orig_place_image(ctx, v, d_cls, dual):
    key = (v, d_cls, dual)
    cached = ctx._image_cache.get(key)
    if cached is not None:
        return cached
    sub = _image_by_search(ctx, v, d_cls.rep(), dual)
    ctx._image_cache[key] = sub
    return sub


def local_image_from_class(ctx, v, d_cls, dual=False):
    """local_image keyed directly by the class of d at v (for sampled d)."""
    if v not in ctx.places:
        raise ValueError(f"{v} is not a place of the base bad set")
    return _orig_place_image(ctx, v, d_cls, dual)


# ---------------------------------------------------------------------------
# Tamagawa-ratio valuation
# ---------------------------------------------------------------------------

def bad_places_of_twist(ctx, d):
    """T_d: the base bad places plus the primes dividing d."""
    _, primes = factor_squarefree(d)
    extra = tuple(
        Place(p) for p in primes if p != 2 and p not in ctx.odd_bad_primes
    )
    return tuple(
        sorted(set(ctx.places) | set(extra), key=lambda v: v.sort_key())
    )


def c_value(ctx: CurveContext, d):
    """c_d = sum over v in T of (dim W_v^d - 1).

    Depends only on the classes of d at the base bad places; exposed
    separately because the harness needs it to split u into its local and
    type-count parts.
    """
    return sum(local_image(ctx, d, v).dim - 1 for v in ctx.places)


def c_value_from_classes(ctx, d_classes):
    """c_d from a mapping place -> class of d at that place."""
    return sum(
        local_image_from_class(ctx, v, d_classes[v]).dim - 1
        for v in ctx.places
    )


def tamagawa_ord2(ctx: CurveContext, d):
    """ord_2 of |Sel_phi(twist d)| / |Sel_phihat(twist d)|.

    Computed as sum over all v in T_d of (dim W_v^d - 1); equals
    c_d + #(type 3 primes of d) - #(type 2 primes of d).
    """
    total = c_value(ctx, d)
    _, primes = factor_squarefree(d)
    for p in primes:
        if p != 2 and p not in ctx.odd_bad_primes:
            total += local_image(ctx, d, Place(p)).dim - 1
    return total


def type_counts(ctx: CurveContext, d):
    """Counts (n1, n2, n3, n4) of the twisted primes of d by type."""
    _, primes = factor_squarefree(d)
    counts = [0, 0, 0, 0]
    for p in primes:
        if p != 2 and p not in ctx.odd_bad_primes:
            counts[classify_prime(ctx, p) - 1] += 1
    return tuple(counts)
