"""Command-line front end.

Subcommands: constants, classify, rank, sweep, simulate, randmat, verify.
A key=value config file may supply any long option; explicit flags win.
Worker count comes only from the TWISTDESCENT_WORKERS environment
variable.  Exit codes: 0 success, 1 verification failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import sys
import time

from . import constants as cl
from . import f2, harness, model
from .curves import CurveError, classify_prime, new_curve
from .model import InsufficientConditioningError
from .oracle import selmer_phi
from .pipeline import selmer_rank_matrix


def _parse_curve(text):
    try:
        a, b = text.split(",")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("curve must be 'A,B'")


def _build_parser():
    top = argparse.ArgumentParser(prog="twistdescent", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="rank-distribution constants")
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--rmax", type=int, required=True)
    p.add_argument("--p", type=int, default=None,
                   help="prime: tabulate the u-probabilities instead")

    p = sub.add_parser("classify", help="prime types for a curve")
    p.add_argument("--curve", type=_parse_curve, required=True)
    p.add_argument("--primes", required=True, help="comma-separated primes")

    p = sub.add_parser("rank", help="Selmer rank of one twist")
    p.add_argument("--curve", type=_parse_curve, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--path", choices=("matrix", "oracle", "both"),
                   default="both")

    p = sub.add_parser("sweep", help="exact sweep over twists up to a bound")
    p.add_argument("--curve", type=_parse_curve, required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--mode", choices=("coprime", "full"), default="coprime")
    p.add_argument("--out", default=None, help="report JSON path")
    p.add_argument("--csv", default=None, help="directory for per-u CSVs")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="sampled-symbol rank distribution")
    p.add_argument("--curve", type=_parse_curve, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--u", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("randmat", help="random-matrix nullity histogram")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("verify", help="cross-path identity suite")
    p.add_argument("--curve", type=_parse_curve, required=True)
    p.add_argument("--X", type=int, required=True)
    return top


def _apply_config(argv):
    """Config file values become trailing flags; explicit flags still win."""
    path = None
    if "--config" in argv:
        k = argv.index("--config")
        path = argv[k + 1]
        argv = argv[:k] + argv[k + 2 :]
    elif any(a.startswith("--config=") for a in argv):
        k = next(i for i, a in enumerate(argv) if a.startswith("--config="))
        path = argv[k].split("=", 1)[1]
        argv = argv[:k] + argv[k + 1 :]
    if path is None:
        return argv
    extra = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            flag = f"--{key.strip()}"
            if flag not in argv:
                extra.extend([flag, value.strip()])
    return argv + extra


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config(argv)
        args = parser.parse_args(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _dispatch(args)
    except (CurveError, InsufficientConditioningError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args):
    cmd = args.command
    if cmd == "constants":
        if args.p is not None:
            table = cl.alpha_prime_table(args.p, args.u, args.rmax)
        else:
            table = cl.alpha_table(args.u, args.rmax)
        out = {
            "u": table.u,
            "p": table.p,
            "r_max": table.r_max,
            "values": [float(v) for v in table.values],
            "tail": table.tail,
        }
        sys.stdout.write(harness.dump_json(out))
        return 0

    if cmd == "classify":
        ctx = new_curve(*args.curve)
        primes = [int(p) for p in args.primes.split(",")]
        out = {str(p): classify_prime(ctx, p) for p in primes}
        sys.stdout.write(harness.dump_json(out))
        return 0

    if cmd == "rank":
        ctx = new_curve(*args.curve)
        out = {"curve": list(args.curve), "d": args.d}
        if args.path in ("oracle", "both"):
            res = selmer_phi(ctx, args.d)
            out["r_oracle"] = res.dim_phi
            out["r_oracle_dual"] = res.dim_phihat
            out["u"] = res.u
        if args.path in ("matrix", "both"):
            out["r_matrix"] = selmer_rank_matrix(ctx, args.d)
        if args.path == "both" and out["r_matrix"] != out["r_oracle"]:
            print(f"error: path disagreement at d={args.d}", file=sys.stderr)
            return 1
        sys.stdout.write(harness.dump_json(out))
        return 0

    if cmd == "sweep":
        ctx = new_curve(*args.curve)
        t0 = time.time()
        report = harness.sweep(ctx, args.X, mode=args.mode, seed=args.seed)
        text = harness.dump_json(report.to_json_dict(), args.out)
        if args.out is None:
            sys.stdout.write(text)
        if args.csv:
            harness.write_csv_histograms(report, args.csv)
        print(
            f"sweep: {len(report.records)} twists in {time.time() - t0:.1f}s",
            file=sys.stderr,
        )
        return 0

    if cmd == "simulate":
        ctx = new_curve(*args.curve)
        t0 = time.time()
        est = model.estimate_alpha_n(
            ctx, args.u, args.n, args.trials, args.seed,
            workers=harness.worker_count(),
        )
        out = {
            "curve": list(args.curve),
            "n": est.n,
            "u": est.u,
            "seed": args.seed,
            "trials": est.trials,
            "accepted": est.accepted,
            "accepted_typed": est.accepted_typed,
            "histogram": {str(r): c for r, c in sorted(est.histogram.items())},
            "histogram_typed": {
                str(r): c for r, c in sorted(est.histogram_typed.items())
            },
            "alpha_reference": {
                str(r): float(cl.alpha(r, est.u))
                for r in range(0, max(est.histogram, default=1) + 1)
            },
        }
        text = harness.dump_json(out, args.out)
        if args.out is None:
            sys.stdout.write(text)
        print(
            f"simulate: {est.accepted}/{est.trials} accepted in "
            f"{time.time() - t0:.1f}s",
            file=sys.stderr,
        )
        return 0

    if cmd == "randmat":
        hist = f2.nullity_histogram(
            args.rows, args.cols, args.trials, f2.make_rng(args.seed)
        )
        u = args.cols - args.rows
        ref = [float(cl.alpha_prime(2, u, r)) for r in range(args.rows + 1)]
        out = {
            "rows": args.rows,
            "cols": args.cols,
            "trials": args.trials,
            "seed": args.seed,
            "histogram": {str(k): v for k, v in hist.items()},
            "reference_u": u,
            "total_variation": f2.total_variation(hist, ref),
        }
        sys.stdout.write(harness.dump_json(out))
        return 0

    if cmd == "verify":
        ctx = new_curve(*args.curve)
        result = harness.verify(ctx, args.X)
        for line in result.summary_lines():
            print(line)
        if not result.ok:
            for name, d, detail in result.failures[:20]:
                print(f"  {name} failed at d={d} {detail}", file=sys.stderr)
            return 1
        return 0

    raise AssertionError(f"unhandled command {cmd}")


if __name__ == "__main__":
    sys.exit(main())
