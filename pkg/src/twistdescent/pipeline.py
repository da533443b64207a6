"""The F2 matrix route to Selmer ranks.

Builds a labeled presentation matrix whose left nullity is one less than
the Selmer dimension: rows are generators of the twist's support group
plus bases of the local images, columns are the valuation/residue
characters at the bad places.  `condense` then shrinks it, preserving the
left nullity at every step, to the structured matrix whose entries are
single symbols; `condensed_matrix_direct` assembles that structured matrix
straight from symbol data without building the big one.

Everything is generic over a SymbolOracle, so the same code serves real
twists (symbols computed from integers) and sampled symbol data (see
`model`), and a recorded transcript can be replayed with no access to the
underlying primes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from . import _f2core_py
from .arith import (
    CHI2_BIT,
    CHI2P_BIT,
    REAL_PLACE,
    TWO_PLACE,
    Place,
    SquareClass,
    class_from_coords,
    factor_squarefree,
    hilbert_additive,
    legendre_additive,
    ord_p,
    square_class,
)
from .curves import CurveContext, classify_prime, local_image_from_class
from .f2 import BitMatrix

TRANSCRIPT_VERSION = 1


def _eps(r):
    return (r - 1) // 2 % 2


def _omega(r):
    return (r * r - 1) // 8 % 2


def residue_symbol(ctx, g, r):
    """Additive symbol of g in {-1, 2, odd bad prime} mod a prime = r (mod D).

    Sign, two, and reciprocity cases; everything is determined by the
    residue because D is divisible by 8 and by every odd bad prime.
    """
    if g == -1:
        return _eps(r)
    if g == 2:
        return _omega(r)
    return (legendre_additive(r, g) + _eps(g) * _eps(r)) % 2


def _integer_symbol(ctx, m, r):
    """Additive symbol of a bad-set-supported integer m mod a prime = r."""
    out = 0
    if m < 0:
        out ^= residue_symbol(ctx, -1, r)
        m = -m
    e2 = ord_p(m, 2) if m % 2 == 0 else 0
    if e2 % 2:
        out ^= residue_symbol(ctx, 2, r)
    m >>= e2
    for q in ctx.odd_bad_primes:
        e = ord_p(m, q) if m % q == 0 else 0
        if e % 2:
            out ^= residue_symbol(ctx, q, r)
        m //= q**e
    assert m == 1, "integer not supported on the bad set"
    return out


def residue_type(ctx, r):
    """Prime type 1..4 of a prime congruent to r mod D."""
    a = _integer_symbol(ctx, ctx.delta_full, r)
    b = _integer_symbol(ctx, ctx.B, r)
    return {(0, 0): 1, (0, 1): 2, (1, 0): 3, (1, 1): 4}[(a, b)]


def residue_char(char, r):
    """Value at a prime = r (mod D) of a character at a base bad place."""
    kind, site = char
    if kind == "ord":
        return 0
    if site == TWO_PLACE:
        return CHI2_BIT[r % 8] if kind == "chi" else CHI2P_BIT[r % 8]
    return legendre_additive(r, site.p)


# ---------------------------------------------------------------------------
# symbol oracles
# ---------------------------------------------------------------------------

class SymbolOracle:
    """Answers every symbol query the matrix construction makes.

    Twisted primes are addressed by index 0..n-1.  Concrete oracles supply
    residues mod D, pairwise symbols, lambda bits for type-1 indices, and
    the square classes of d at the base bad places; everything else
    (prime types, character values, symbols of bad primes at twisted ones)
    is derived here from the residues via quadratic reciprocity.
    """

    ctx: CurveContext
    n: int

    def residue(self, i):
        raise NotImplementedError

    def pair(self, i, j):
        """Additive Legendre symbol of p_i modulo p_j (i != j)."""
        raise NotImplementedError

    def lambda_bit(self, i):
        raise NotImplementedError

    def d_sign(self):
        raise NotImplementedError

    def d_class(self, v) -> SquareClass:
        raise NotImplementedError

    def prime_label(self, i):
        return f"p{i}"

    # -- derived -----------------------------------------------------------

    def symbol_at(self, g, i):
        """Additive symbol of g in {-1, 2, odd bad prime} modulo p_i."""
        return residue_symbol(self.ctx, g, self.residue(i))

    def prime_type(self, i):
        return residue_type(self.ctx, self.residue(i))

    def char_value(self, char, i):
        """Value at p_i of a character at a base bad place."""
        return residue_char(char, self.residue(i))

    def diagonal_bit(self, i):
        """chi_{p_i} of (d / p_i)(A + 2 sqrt(B)), the condensed diagonal."""
        out = self.lambda_bit(i)
        if self.d_sign() < 0:
            out ^= self.symbol_at(-1, i)
        for j in range(self.n):
            if j != i:
                out ^= self.pair(j, i)
        return out


class RealOracle(SymbolOracle):
    """Symbols of an actual squarefree twist d, computed from integers."""

    def __init__(self, ctx, d):
        sign, primes = factor_squarefree(d)
        self.ctx = ctx
        self.d = d
        self.twisted = tuple(
            p for p in primes if p != 2 and p not in ctx.odd_bad_primes
        )
        self.n = len(self.twisted)
        self._sign = sign

    def residue(self, i):
        return self.twisted[i] % self.ctx.D

    def pair(self, i, j):
        return legendre_additive(self.twisted[i], self.twisted[j])

    def lambda_bit(self, i):
        p = self.twisted[i]
        t = classify_prime(self.ctx, p)
        if t not in (1, 3):
            raise ValueError(f"lambda bit undefined for type {t}")
        s = self.ctx.sqrt_B_mod(p)
        return legendre_additive(self.ctx.A + 2 * s, p)

    def d_sign(self):
        return self._sign

    def d_class(self, v):
        return square_class(self.d, v)

    def prime_label(self, i):
        return self.twisted[i]


class ClassOracle(SymbolOracle):
    """No twisted primes; just the classes of d at the base bad places.

    Used to build the base block of the condensed matrix, which depends on
    the twist only through those classes.
    """

    def __init__(self, ctx, d_classes, sign):
        self.ctx = ctx
        self.n = 0
        self._classes = dict(d_classes)
        self._sign = sign

    def residue(self, i):
        raise IndexError("no twisted primes")

    pair = lambda_bit = residue

    def d_sign(self):
        return self._sign

    def d_class(self, v):
        return self._classes[v]


class TranscriptOracle(SymbolOracle):
    """Replays a recorded transcript; sees no actual primes."""

    def __init__(self, ctx, data):
        if data.get("version") != TRANSCRIPT_VERSION:
            raise ValueError("unknown transcript version")
        self.ctx = ctx
        self.n = int(data["n"])
        self._residues = [int(r) for r in data["residues_mod_D"]]
        self._pairs = {
            tuple(map(int, k.split(","))): int(v)
            for k, v in data["pair_symbols"].items()
        }
        self._lambda = {int(k): int(v) for k, v in data["lambda"].items()}
        self._sign = int(data["d_sign"])
        self._classes = {}
        for key, coords in data["d_local_classes"].items():
            v = REAL_PLACE if key == "inf" else Place(int(key))
            self._classes[v] = class_from_coords(v, tuple(coords))

    def residue(self, i):
        return self._residues[i]

    def pair(self, i, j):
        if (i, j) in self._pairs:
            return self._pairs[(i, j)]
        # reciprocity fills the lower triangle
        flip = _eps(self.residue(i)) * _eps(self.residue(j))
        return (self._pairs[(j, i)] + flip) % 2

    def lambda_bit(self, i):
        return self._lambda.get(i, 0)

    def d_sign(self):
        return self._sign

    def d_class(self, v):
        return self._classes[v]


def record_transcript(oracle: SymbolOracle):
    """Serializable transcript of every symbol the pipeline may consume."""
    classes = {}
    for v in oracle.ctx.places:
        key = "inf" if v.is_real else str(v.p)
        classes[key] = list(oracle.d_class(v).coords())
    pairs = {}
    for i in range(oracle.n):
        for j in range(i + 1, oracle.n):
            pairs[f"{i},{j}"] = oracle.pair(i, j)
    lam = {
        str(i): oracle.lambda_bit(i)
        for i in range(oracle.n)
        if oracle.prime_type(i) == 1
    }
    return {
        "version": TRANSCRIPT_VERSION,
        "n": oracle.n,
        "types": [oracle.prime_type(i) for i in range(oracle.n)],
        "residues_mod_D": [oracle.residue(i) for i in range(oracle.n)],
        "pair_symbols": pairs,
        "lambda": lam,
        "d_sign": oracle.d_sign(),
        "d_local_classes": classes,
    }


def transcript_oracle_from_json(ctx, text):
    return TranscriptOracle(ctx, json.loads(text))


# ---------------------------------------------------------------------------
# the presentation matrix
# ---------------------------------------------------------------------------

def pivot_place(ctx: CurveContext) -> Place:
    """The base place where the discriminant class has odd valuation.

    The real place when the class is negative, else its smallest prime
    factor; generators at this place are excluded from the support rows.
    """
    if ctx.delta < 0:
        return REAL_PLACE
    for p in sorted(p for p in (2, *ctx.odd_bad_primes) if ctx.delta % p == 0):
        return Place(p)
    raise AssertionError("discriminant class is a square")


def _site_chars(site):
    if isinstance(site, Place):
        if site.is_real:
            return (("ord", site),)
        if site.is_two:
            return (("ord", site), ("chi", site), ("chi2p", site))
    return (("ord", site), ("chi", site))


def _u_gen_entries(ctx, oracle, g, cols, col_pos):
    """Row of character values of a support generator g."""
    row = 0
    for c in cols:
        kind, site = c
        if isinstance(site, tuple):  # twisted site ("tw", j)
            j = site[1]
            if isinstance(g, tuple):  # twisted generator
                i = g[1]
                if kind == "ord":
                    bit = 1 if i == j else 0
                else:
                    bit = 0 if i == j else oracle.pair(i, j)
            else:
                bit = 0 if kind == "ord" else oracle.symbol_at(g, j)
        else:
            if isinstance(g, tuple):
                bit = oracle.char_value((kind, site), g[1])
            else:
                bit = _char_of_integer(kind, site, g)
        if bit:
            row |= 1 << col_pos[c]
    return row


def _char_of_integer(kind, site: Place, g):
    """Character value at an honest integer g (generator of the support)."""
    if site.is_real:
        return 1 if (kind == "ord" and g < 0) else 0
    if site.is_two:
        cls = square_class(g, site)
        if kind == "ord":
            return cls.val
        return CHI2_BIT[cls.unit] if kind == "chi" else CHI2P_BIT[cls.unit]
    cls = square_class(g, site)
    return cls.val if kind == "ord" else cls.unit


def presentation_matrix(ctx: CurveContext, oracle: SymbolOracle) -> BitMatrix:
    """The full labeled matrix whose left nullity is dim Sel_phi - 1.

    Rows: support generators (-1 unless the pivot place is real, the
    finite base bad primes except the pivot, the twisted primes), then
    per-place bases of the local images.  Columns: the valuation and
    residue characters at the bad places of the twist.
    """
    sites = list(ctx.places) + [("tw", i) for i in range(oracle.n)]
    cols = [c for s in sites for c in _site_chars(s)]
    col_pos = {c: k for k, c in enumerate(cols)}

    v_star = pivot_place(ctx)
    gens = []
    if not v_star.is_real:
        gens.append(-1)
    for v in ctx.places:
        if not v.is_real and v != v_star:
            gens.append(v.p)
    gens.extend(("tw", i) for i in range(oracle.n))

    row_labels = []
    rows = []
    for g in gens:
        row_labels.append(("u", g))
        rows.append(_u_gen_entries(ctx, oracle, g, cols, col_pos))

    # local-image bases: base places from cached search, twisted by type
    for v in ctx.places:
        sub = local_image_from_class(ctx, v, oracle.d_class(v))
        chars = _site_chars(v)
        for j, cls in enumerate(sub.basis):
            row = 0
            for bit, c in zip(cls.coords(), chars):
                if bit:
                    row |= 1 << col_pos[c]
            row_labels.append(("w", v, j))
            rows.append(row)
    for i in range(oracle.n):
        t = oracle.prime_type(i)
        site = ("tw", i)
        basis_bits = []  # (ord bit, chi bit) per basis element
        if t == 1:
            basis_bits = [(1, oracle.diagonal_bit(i))]
        elif t == 3:
            basis_bits = [(0, 1), (1, oracle.diagonal_bit(i))]
        elif t == 4:
            basis_bits = [(0, 1)]
        for j, (ob, cb) in enumerate(basis_bits):
            row = (ob << col_pos[("ord", site)]) | (cb << col_pos[("chi", site)])
            row_labels.append(("w", site, j))
            rows.append(row)

    return BitMatrix.from_rows(
        rows, len(cols), row_labels=tuple(row_labels), col_labels=tuple(cols)
    )


def hilbert_pairing_expansion(ctx: CurveContext, v: Place):
    """Coefficients over the characters at v of x -> (x, B)_v.

    Verified exhaustively against the pairing on all classes at v.
    """
    B = ctx.B
    if v.is_real:
        out = {"ord": 1 if B < 0 else 0}
    elif v.is_two:
        out = {
            "ord": hilbert_additive(2, B, v),
            "chi": hilbert_additive(3, B, v),
            "chi2p": hilbert_additive(5, B, v),
        }
    else:
        out = {
            "ord": hilbert_additive(v.p, B, v),
            "chi": ord_p(B, v.p) % 2,
        }
    kinds = [c[0] for c in _site_chars(v)]
    import itertools

    for coords in itertools.product((0, 1), repeat=v.local_dim()):
        cls = class_from_coords(v, coords)
        want = hilbert_additive(cls.rep(), B, v)
        got = sum(out[k] * b for k, b in zip(kinds, coords)) % 2
        assert got == want, f"pairing expansion failed at {v}"
    return out


def right_nullvector(ctx, oracle, matrix: BitMatrix):
    """The structural column dependency as a bit vector over the columns."""
    vec = 0
    for k, c in enumerate(matrix.col_labels):
        kind, site = c
        if isinstance(site, tuple):
            t = oracle.prime_type(site[1])
            bit = 1 if (kind == "ord" and t in (2, 4)) else 0
        else:
            bit = hilbert_pairing_expansion(ctx, site)[kind]
        if bit:
            vec |= 1 << k
    return vec


# ---------------------------------------------------------------------------
# condensing
# ---------------------------------------------------------------------------

class CondenseError(AssertionError):
    """A reduction step would have changed the left nullity."""


class _Work:
    """Mutable matrix state during condensing."""

    def __init__(self, m: BitMatrix):
        self.cols = list(m.col_labels)
        self.col_pos = {c: k for k, c in enumerate(self.cols)}
        self.alive_cols = list(m.col_labels)
        self.rows = {lab: r for lab, r in zip(m.row_labels, m.row_ints())}
        self.row_order = list(m.row_labels)
        # column functionals over the original columns (tracked for the
        # base block; consumed by the direct construction)
        self.functional = {c: 1 << self.col_pos[c] for c in self.cols}

    def nullity(self):
        mask_bits = [self.col_pos[c] for c in self.alive_cols]
        packed = []
        for lab in self.row_order:
            r = self.rows[lab]
            packed.append(
                sum(((r >> b) & 1) << k for k, b in enumerate(mask_bits))
            )
        return len(packed) - _f2core_py.rank_ints(packed)

    def rank(self):
        return len(self.row_order) - self.nullity()

    def col_weight_rows(self, c):
        b = self.col_pos[c]
        return [lab for lab in self.row_order if (self.rows[lab] >> b) & 1]

    def drop_col(self, c):
        self.alive_cols.remove(c)

    def drop_row(self, lab):
        self.row_order.remove(lab)
        del self.rows[lab]

    def to_bitmatrix(self):
        mask_bits = [self.col_pos[c] for c in self.alive_cols]
        rows = []
        for lab in self.row_order:
            r = self.rows[lab]
            rows.append(
                sum(((r >> b) & 1) << k for k, b in enumerate(mask_bits))
            )
        return BitMatrix.from_rows(
            rows,
            len(self.alive_cols),
            row_labels=tuple(self.row_order),
            col_labels=tuple(self.alive_cols),
        )


def _dependent_candidates(ctx):
    """Base columns that may carry the structural dependency, in priority.

    The pairing character x -> sum_v (x, B)_v annihilates every row, so
    any column whose coefficient in its expansion is 1 is dependent on the
    other columns.  Valuation candidates must have even valuation of the
    discriminant class (the pivot place's column must survive).  Tiers:
    valuation columns where the dual-discriminant class has odd valuation
    and the coefficient certifies the dependency; other certified
    valuation columns; certified residue columns; uncertified valuation
    columns left entirely to the rank check.  All choices are independent
    of the twist, which keeps the direct construction's base block in step
    with full condensing.
    """
    tiers = ([], [], [], [])
    for v in ctx.places:
        expansion = hilbert_pairing_expansion(ctx, v)
        if v.is_real:
            val_ok = ctx.delta > 0
            prime_odd = ctx.delta_prime < 0
        else:
            val_ok = ord_p(ctx.delta_full, v.p) % 2 == 0
            prime_odd = ord_p(ctx.B, v.p) % 2 == 1
        if val_ok:
            col = ("ord", v)
            if expansion["ord"] and prime_odd:
                tiers[0].append(col)
            elif expansion["ord"]:
                tiers[1].append(col)
            else:
                tiers[3].append(col)
        for kind in ("chi2p", "chi"):
            if expansion.get(kind):
                tiers[2].append((kind, v))
    return tiers[0] + tiers[1] + tiers[2] + tiers[3]


def condense(m: BitMatrix, ctx: CurveContext, check_steps=True):
    """Shrink the presentation matrix without changing its left nullity.

    Four passes: remove the dependent valuation column; remove the pivot
    place's valuation column with its local row; remove every other
    valuation column with one incident row; remove the remaining local
    rows with one residue column each.  Each pass asserts nullity
    preservation when check_steps is set; the dependent-column removal
    always asserts rank preservation (it is the one step whose
    justification is structural rather than local).

    Returns (condensed BitMatrix, functionals) where functionals maps each
    surviving column label to the set of original columns whose characters
    sum to it (as a bit mask over m.col_labels).
    """
    w = _Work(m)
    null0 = w.nullity()

    # 1. dependent column
    dep_col = None
    rank0 = w.rank()
    for col in _dependent_candidates(ctx):
        saved = w.alive_cols[:]
        w.drop_col(col)
        if w.rank() == rank0:
            dep_col = col
            break
        w.alive_cols = saved
    if dep_col is None:
        raise CondenseError("no removable dependent column")

    # 2. pivot-place valuation column: weight one, on a local row
    v_star = pivot_place(ctx)
    col = ("ord", v_star)
    incident = w.col_weight_rows(col)
    if len(incident) != 1 or incident[0][0] != "w":
        raise CondenseError("pivot valuation column is not weight one")
    w.drop_col(col)
    w.drop_row(incident[0])
    if check_steps and w.nullity() != null0:
        raise CondenseError("pivot removal changed the nullity")

    # 3. remaining valuation columns
    for c in [c for c in w.alive_cols if c[0] == "ord"]:
        site = c[1]
        incident = w.col_weight_rows(c)
        u_rows = [lab for lab in incident if lab[0] == "u"]
        w_rows = [lab for lab in incident if lab[0] == "w"]
        if len(u_rows) != 1 or len(w_rows) > 1:
            raise CondenseError(f"unexpected valuation column shape at {site}")
        if w_rows:
            # fold the local row into the support row, then remove it
            w.rows[u_rows[0]] ^= w.rows[w_rows[0]]
            w.drop_row(w_rows[0])
        else:
            w.drop_row(u_rows[0])
        w.drop_col(c)
        if check_steps and w.nullity() != null0:
            raise CondenseError(f"valuation removal at {site} changed nullity")

    # 4. remaining local rows, one residue column each
    for lab in [lab for lab in w.row_order if lab[0] == "w"]:
        site = lab[1]
        chars = [
            c
            for c in _site_chars(site)
            if c in w.alive_cols and (w.rows[lab] >> w.col_pos[c]) & 1
        ]
        support = w.rows[lab]
        alive_mask = sum(1 << w.col_pos[c] for c in w.alive_cols)
        if support & alive_mask & ~sum(
            1 << w.col_pos[c] for c in chars
        ):
            raise CondenseError(f"local row at {site} leaks outside its site")
        if not chars:
            raise CondenseError(f"local row at {site} became zero")
        drop = chars[-1]  # at 2 with both residue columns hit: drop chi2p
        drop_bit = w.col_pos[drop]
        for other in w.row_order:
            if other != lab and (w.rows[other] >> drop_bit) & 1:
                w.rows[other] ^= w.rows[lab]
        # surviving columns at the site absorb the dropped functional
        for c in chars[:-1]:
            w.functional[c] ^= w.functional[drop]
        w.drop_row(lab)
        w.drop_col(drop)
        if check_steps and w.nullity() != null0:
            raise CondenseError(f"local-row removal at {site} changed nullity")

    out = w.to_bitmatrix()
    functionals = {c: w.functional[c] for c in w.alive_cols}
    return out, functionals


# ---------------------------------------------------------------------------
# direct construction of the condensed matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BaseBlock:
    """Condensed base-place block, cacheable by the classes of d there."""

    matrix: BitMatrix
    functionals: dict  # surviving col label -> list of original char labels


def base_block(ctx: CurveContext, d_classes, sign) -> BaseBlock:
    """Condense the base-place submatrix for given local classes of d.

    Depends on d only through its classes at the base bad places, so the
    result is cached on the curve context.
    """
    key = tuple(
        (v.p, d_classes[v].val, d_classes[v].unit) for v in ctx.places
    )
    cache = ctx._image_cache.setdefault("_base_blocks", {})
    if key in cache:
        return cache[key]
    oracle = ClassOracle(ctx, d_classes, sign)
    m = presentation_matrix(ctx, oracle)
    cond, funcs = condense(m, ctx, check_steps=True)
    named = {
        c: [m.col_labels[b] for b in range(len(m.col_labels)) if (mask >> b) & 1]
        for c, mask in funcs.items()
    }
    block = BaseBlock(matrix=cond, functionals=named)
    cache[key] = block
    return block


def condensed_matrix_direct(ctx: CurveContext, oracle: SymbolOracle) -> BitMatrix:
    """Assemble the condensed matrix from symbols, skipping the big matrix.

    The base-place block comes from the cached `base_block`; every entry
    involving a twisted prime is a single symbol: pair symbols off the
    diagonal, the lambda-type diagonal, character values of residues in
    the base columns, symbols of support generators in the twisted
    columns.  Row/column order is the sorted block order: base rows, then
    type-1 rows, then type-3 rows; base columns, then type-1, then type-2.
    """
    d_classes = {v: oracle.d_class(v) for v in ctx.places}
    block = base_block(ctx, d_classes, oracle.d_sign())
    types = [oracle.prime_type(i) for i in range(oracle.n)]
    t1 = [i for i in range(oracle.n) if types[i] == 1]
    t2 = [i for i in range(oracle.n) if types[i] == 2]
    t3 = [i for i in range(oracle.n) if types[i] == 3]

    row_labels = list(block.matrix.row_labels)
    row_labels += [("u", ("tw", i)) for i in t1 + t3]
    col_labels = list(block.matrix.col_labels)
    col_labels += [("chi", ("tw", i)) for i in t1 + t2]

    n_base_rows = block.matrix.n_rows
    n_base_cols = block.matrix.n_cols
    rows = []
    for k, lab in enumerate(block.matrix.row_labels):
        row = block.matrix.row_int(k)
        g = lab[1]
        for off, c in enumerate(col_labels[n_base_cols:]):
            j = c[1][1]
            if oracle.symbol_at(g, j):
                row |= 1 << (n_base_cols + off)
        rows.append(row)
    for i in t1 + t3:
        row = 0
        for k, c in enumerate(block.matrix.col_labels):
            bit = 0
            for orig in block.functionals[c]:
                bit ^= oracle.char_value(orig, i)
            if bit:
                row |= 1 << k
        for off, c in enumerate(col_labels[n_base_cols:]):
            j = c[1][1]
            bit = oracle.diagonal_bit(i) if i == j else oracle.pair(i, j)
            if bit:
                row |= 1 << (n_base_cols + off)
        rows.append(row)

    return BitMatrix.from_rows(
        rows,
        len(col_labels),
        row_labels=tuple(row_labels),
        col_labels=tuple(col_labels),
    )


def sort_to_block_order(m: BitMatrix, oracle: SymbolOracle) -> BitMatrix:
    """Permute a condensed matrix into the direct construction's order."""

    def row_key(lab):
        g = lab[1]
        if isinstance(g, tuple):
            t = oracle.prime_type(g[1])
            return (1 if t == 1 else 2, g[1])
        return (0, 0)

    def col_key(c):
        site = c[1]
        if isinstance(site, tuple):
            t = oracle.prime_type(site[1])
            return (1 if t == 1 else 2, site[1])
        return (0, 0)

    row_perm = sorted(
        range(m.n_rows), key=lambda k: (row_key(m.row_labels[k]), k)
    )
    col_perm = sorted(
        range(m.n_cols), key=lambda k: (col_key(m.col_labels[k]), k)
    )
    dense = m.to_dense()[row_perm][:, col_perm]
    return BitMatrix.from_rows(
        [list(r) for r in dense],
        m.n_cols,
        row_labels=tuple(m.row_labels[k] for k in row_perm),
        col_labels=tuple(m.col_labels[k] for k in col_perm),
    )


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def selmer_rank_matrix(ctx: CurveContext, d, method="direct"):
    """dim Sel_phi of the twist by d via the matrix route.

    Requires d squarefree and coprime to twice the discriminant (the
    closed-form local conditions at the twisted primes need that); the
    enumeration oracle covers the rest.
    """
    import math

    if math.gcd(d, ctx.coprimality_modulus) != 1:
        raise ValueError(
            f"twist {d} shares a factor with the bad set; use the "
            "enumeration path"
        )
    oracle = RealOracle(ctx, d)
    return matrix_rank_from_oracle(ctx, oracle, method)


def matrix_rank_from_oracle(ctx, oracle, method="direct"):
    """Selmer dimension = left nullity of the condensed matrix, plus one."""
    if method == "direct":
        mhat = condensed_matrix_direct(ctx, oracle)
    elif method == "condense":
        m = presentation_matrix(ctx, oracle)
        mhat, _ = condense(m, ctx)
    else:
        raise ValueError(f"unknown method {method!r}")
    nullity = mhat.n_rows - _f2core_py.rank_ints(mhat.row_ints())
    return nullity + 1
