"""Batch front end: exact twist sweeps, verification, and reports.

`sweep` walks every squarefree twist up to a bound, records both
computation paths per twist, and aggregates per-u rank histograms with
comparisons against the limiting constants.  `verify` reruns the
cross-path identities and reports any offending twist.  Reports serialize
to JSON (schema below) and per-u CSV histograms; byte-identical output for
a fixed seed regardless of worker count.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

from .arith import factor_squarefree, hilbert_class_pairing, squarefree_coprime_stream
from .constants import alpha
from .curves import (
    CurveContext,
    bad_places_of_twist,
    c_value,
    classify_prime,
    local_image,
    new_curve,
    tamagawa_ord2,
    type_counts,
)
from .oracle import selmer_phi
from .pipeline import (
    RealOracle,
    condense,
    condensed_matrix_direct,
    presentation_matrix,
    right_nullvector,
    selmer_rank_matrix,
    sort_to_block_order,
)

SCHEMA_VERSION = 1
_CHUNK = 128


def worker_count():
    """Worker processes, from the TWISTDESCENT_WORKERS environment variable."""
    try:
        return max(1, int(os.environ.get("TWISTDESCENT_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass
class TwistRecord:
    d: int
    prime_types: list
    n1: int
    n2: int
    n3: int
    n4: int
    u: int
    c_d: int
    r_oracle: int
    r_matrix: int | None  # absent outside the coprime stratum
    m: int  # bad-set-supported part of d (sign included)
    s_prime_flags: list  # the six membership properties

    def to_json(self):
        return asdict(self)


def _s_prime_flags(ctx, d, X, n_counts, omega):
    loglog = math.log(math.log(X)) if X > math.e else 0.0
    window = loglog ** (5 / 8) if loglog > 0 else 0.0
    return [
        0 < d <= X,
        True,  # squarefree by construction of the stream
        all(d % p for p in (2, *ctx.odd_bad_primes)),
        True,  # the u property is a per-stratum match, recorded via u
        abs(omega - loglog) < window,
        all(c > omega / 10 for c in n_counts),
    ]


def _twist_record(ctx, d, X, matrix_path):
    sign, primes = factor_squarefree(d)
    twisted = [p for p in primes if p != 2 and p not in ctx.odd_bad_primes]
    types = [classify_prime(ctx, p) for p in twisted]
    counts = type_counts(ctx, d)
    res = selmer_phi(ctx, d)
    u = tamagawa_ord2(ctx, d)
    assert u == res.u, f"Tamagawa/Selmer mismatch at d={d}"
    r_matrix = None
    if matrix_path:
        r_matrix = selmer_rank_matrix(ctx, d, method="direct")
        assert r_matrix == res.dim_phi, f"matrix/oracle mismatch at d={d}"
    m = sign
    for p in primes:
        if p == 2 or p in ctx.odd_bad_primes:
            m *= p
    return TwistRecord(
        d=d,
        prime_types=types,
        n1=counts[0],
        n2=counts[1],
        n3=counts[2],
        n4=counts[3],
        u=u,
        c_d=c_value(ctx, d),
        r_oracle=res.dim_phi,
        r_matrix=r_matrix,
        m=m,
        s_prime_flags=_s_prime_flags(ctx, d, X, counts, len(primes)),
    )


def _sweep_chunk(args):
    (A, B, X, matrix_path, ds) = args
    ctx = new_curve(A, B)
    return [_twist_record(ctx, d, X, matrix_path) for d in ds]


@dataclass
class SweepReport:
    curve: tuple
    X: int
    mode: str
    seed: int
    records: list
    histograms: dict = field(default_factory=dict)  # u -> {r -> count}
    moment_rows: list = field(default_factory=list)
    alpha_rows: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    def finalize(self, k_max=2):
        hist = {}
        for rec in self.records:
            hist.setdefault(rec.u, {})
            hist[rec.u][rec.r_oracle] = hist[rec.u].get(rec.r_oracle, 0) + 1
        self.histograms = {u: dict(sorted(h.items())) for u, h in sorted(hist.items())}
        self.alpha_rows = []
        for u, h in self.histograms.items():
            total = sum(h.values())
            for r in range(0, max(h) + 1):
                count = h.get(r, 0)
                a = float(alpha(r, u))
                self.alpha_rows.append(
                    {
                        "u": u,
                        "r": r,
                        "count": count,
                        "frequency": count / total,
                        "alpha_ru": a,
                        "diff": count / total - a,
                    }
                )
        self.moment_rows = moment_report(self.histograms, k_max)
        strata = {}
        for rec in self.records:
            ok = rec.s_prime_flags
            in_sp = all(ok[0:3]) and ok[4] and ok[5]
            in_spp = all(ok[0:3])
            key = rec.u
            a, b = strata.get(key, (0, 0))
            strata[key] = (a + in_sp, b + in_spp)
        self.counts = {
            "twists": len(self.records),
            "s_prime_by_u": {u: v[0] for u, v in sorted(strata.items())},
            "s_double_prime_by_u": {u: v[1] for u, v in sorted(strata.items())},
        }
        return self

    def to_json_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "curve": list(self.curve),
            "X": self.X,
            "mode": self.mode,
            "seed": self.seed,
            "histograms": {
                str(u): {str(r): c for r, c in h.items()}
                for u, h in self.histograms.items()
            },
            "alpha_rows": self.alpha_rows,
            "moment_rows": self.moment_rows,
            "counts": self.counts,
            "records": [rec.to_json() for rec in self.records],
        }


def moment_report(histograms, k_max, reference_r_max=40):
    """Empirical moments of the Selmer size per (k, u) against the constants.

    Report-only at real sweep scale: convergence there is doubly
    logarithmic, so no tolerance is asserted here; the model layer asserts
    the same comparison in its own regime.  Empty strata are omitted.
    """
    if k_max > 4:
        raise ValueError("k_max at most 4")
    rows = []
    for u, h in sorted(histograms.items()):
        total = sum(h.values())
        if total == 0:
            continue
        for k in range(0, k_max + 1):
            emp = sum(c * 2 ** (k * r) for r, c in h.items()) / total
            ref = float(sum(alpha(r, u) * 2 ** (k * r) for r in range(reference_r_max)))
            rows.append(
                {
                    "u": u,
                    "k": k,
                    "empirical": emp,
                    "reference": ref,
                    "ratio": emp / ref if ref else None,
                    "samples": total,
                }
            )
    return rows


def sweep(ctx: CurveContext, X, mode="coprime", seed=0, workers=None):
    """One TwistRecord per squarefree twist with |d| <= X.

    mode "coprime": twists coprime to twice the discriminant, both
    computation paths (and their equality asserted).  mode "full": every
    squarefree twist, enumeration path only, with the bad-set-supported
    part m recorded for the decomposition into sub-families.
    """
    if X < 1:
        raise ValueError("X must be >= 1")
    if mode not in ("coprime", "full"):
        raise ValueError(f"unknown mode {mode!r}")
    workers = worker_count() if workers is None else workers
    matrix_path = mode == "coprime"
    forbidden = {2, *ctx.odd_bad_primes} if mode == "coprime" else ()
    ds = list(squarefree_coprime_stream(X, forbidden))
    for d in ds:
        if len(bad_places_of_twist(ctx, d)) > 30:
            raise ValueError(f"twist {d} has too many bad places")
    chunks = [
        (ctx.A, ctx.B, X, matrix_path, ds[i : i + _CHUNK])
        for i in range(0, len(ds), _CHUNK)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sweep_chunk, chunks))
    else:
        parts = [_sweep_chunk(c) for c in chunks]
    records = [rec for part in parts for rec in part]
    report = SweepReport(
        curve=(ctx.A, ctx.B), X=X, mode=mode, seed=seed, records=records
    )
    return report.finalize()


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------

@dataclass
class VerifyResult:
    ok: bool
    checks: dict  # name -> (passes, failures)
    failures: list  # (check, d, detail)

    def summary_lines(self):
        lines = []
        for name, (good, bad) in self.checks.items():
            status = "pass" if bad == 0 else "FAIL"
            lines.append(f"{status} {name}: {good} ok, {bad} failed")
        return lines


def _verify_chunk(args):
    (A, B, ds) = args
    ctx = new_curve(A, B)
    checks = {
        name: [0, 0]
        for name in (
            "oracle-vs-matrix",
            "cassels",
            "duality",
            "row-col-difference",
            "surviving-labels",
            "two-path-equality",
            "right-nullvector",
        )
    }
    failures = []

    def tally(name, cond, d, detail=""):
        if cond:
            checks[name][0] += 1
        else:
            checks[name][1] += 1
            failures.append((name, d, detail))

    for d in ds:
        res = selmer_phi(ctx, d)
        r_dir = selmer_rank_matrix(ctx, d, method="direct")
        r_cond = selmer_rank_matrix(ctx, d, method="condense")
        tally(
            "oracle-vs-matrix",
            res.dim_phi == r_dir == r_cond,
            d,
            f"oracle {res.dim_phi} direct {r_dir} condense {r_cond}",
        )
        tam = tamagawa_ord2(ctx, d)
        tally("cassels", res.u == tam, d, f"u {res.u} tamagawa {tam}")
        dual_ok = True
        for v in bad_places_of_twist(ctx, d):
            W = local_image(ctx, d, v)
            Wd = local_image(ctx, d, v, dual=True)
            if W.dim + Wd.dim != v.local_dim():
                dual_ok = False
            for b1 in W.basis:
                for b2 in Wd.basis:
                    if hilbert_class_pairing(b1, b2) != 0:
                        dual_ok = False
        tally("duality", dual_ok, d)
        oracle = RealOracle(ctx, d)
        mhat = condensed_matrix_direct(ctx, oracle)
        tally(
            "row-col-difference",
            mhat.n_rows - mhat.n_cols == tam,
            d,
            f"{mhat.n_rows}x{mhat.n_cols} vs u={tam}",
        )
        types = {i: oracle.prime_type(i) for i in range(oracle.n)}
        row_tw = {
            lab[1][1] for lab in mhat.row_labels if isinstance(lab[1], tuple)
        }
        col_tw = {c[1][1] for c in mhat.col_labels if isinstance(c[1], tuple)}
        tally(
            "surviving-labels",
            row_tw == {i for i, t in types.items() if t in (1, 3)}
            and col_tw == {i for i, t in types.items() if t in (1, 2)},
            d,
        )
        m = presentation_matrix(ctx, oracle)
        cond_m, _ = condense(m, ctx)
        ordered = sort_to_block_order(cond_m, oracle)
        tally(
            "two-path-equality",
            ordered.row_labels == mhat.row_labels
            and ordered.col_labels == mhat.col_labels
            and ordered.to_dense().tolist() == mhat.to_dense().tolist(),
            d,
        )
        vec = right_nullvector(ctx, oracle, m)
        annihilated = all(
            bin(r & vec).count("1") % 2 == 0 for r in m.row_ints()
        )
        tally("right-nullvector", annihilated, d)
    return checks, failures


def verify(ctx: CurveContext, X, workers=None):
    """Run every cross-path identity on the coprime twists up to X."""
    workers = worker_count() if workers is None else workers
    forbidden = {2, *ctx.odd_bad_primes}
    ds = list(squarefree_coprime_stream(X, forbidden))
    chunks = [
        (ctx.A, ctx.B, ds[i : i + _CHUNK]) for i in range(0, len(ds), _CHUNK)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_verify_chunk, chunks))
    else:
        parts = [_verify_chunk(c) for c in chunks]
    checks = {}
    failures = []
    for part_checks, part_failures in parts:
        for name, (good, bad) in part_checks.items():
            g, b = checks.get(name, (0, 0))
            checks[name] = (g + good, b + bad)
        failures.extend(part_failures)
    return VerifyResult(ok=not failures, checks=checks, failures=failures)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def dump_json(obj, path=None):
    """Canonical JSON: sorted keys, fixed separators, newline-terminated."""
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def write_csv_histograms(report: SweepReport, directory):
    """Per-u histogram CSVs: r,count,frequency,alpha_ru,diff."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for u in report.histograms:
        rows = [row for row in report.alpha_rows if row["u"] == u]
        name = f"u{u:+d}.csv"
        path = os.path.join(directory, name)
        with open(path, "w") as fh:
            fh.write("r,count,frequency,alpha_ru,diff\n")
            for row in rows:
                fh.write(
                    f"{row['r']},{row['count']},{row['frequency']!r},"
                    f"{row['alpha_ru']!r},{row['diff']!r}\n"
                )
        paths.append(path)
    return paths
