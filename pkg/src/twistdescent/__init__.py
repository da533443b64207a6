"""Selmer ranks of quadratic twists by two-isogeny descent.

Exact computation via an F2 matrix pipeline cross-checked against a
brute-force enumeration oracle, plus Monte Carlo verification of the
limiting rank distribution and its Cohen-Lenstra constants.
"""
from .arith import (
    GlobalClass,
    Place,
    RamifiedSymbolError,
    REAL_PLACE,
    SquareClass,
    TWO_PLACE,
    factor_squarefree,
    hilbert_additive,
    jacobi,
    legendre_additive,
    odd_place,
    square_class,
    squarefree_coprime_stream,
)
from .constants import alpha, alpha_prime, alpha_prime_table, alpha_table
from .curves import (
    CurveContext,
    CurveError,
    classify_prime,
    c_value,
    local_image,
    local_image_dual,
    new_curve,
    tamagawa_ord2,
    twist_curve,
)
from .f2 import (
    BitMatrix,
    derived_rng,
    left_nullity,
    left_nullspace_basis,
    make_rng,
    nullity_histogram,
    rank,
    sample_uniform,
    total_variation,
)
from .harness import SweepReport, TwistRecord, moment_report, sweep, verify
from .model import (
    SampledOracle,
    estimate_alpha_n,
    fullrank_probe,
    sample_symbols,
    type_count_probe,
)
from .oracle import SelmerResult, selmer_phi, selmer_phihat
from .pipeline import (
    RealOracle,
    SymbolOracle,
    TranscriptOracle,
    condense,
    condensed_matrix_direct,
    hilbert_pairing_expansion,
    presentation_matrix,
    record_transcript,
    selmer_rank_matrix,
)

__version__ = "0.1.0"
