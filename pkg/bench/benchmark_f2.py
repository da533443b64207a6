#!/usr/bin/env python3
"""Benchmark the compiled F2 kernel against the pure-Python fallback.

Times raw rank computation and the batched nullity histogram that the
Monte Carlo layers sit on.  Run from the repository root:

    python3 bench/benchmark_f2.py [--trials 2000]
"""
import argparse
import time


from twistdescent import f2


def time_backend(name, shapes, trials):
    f2.set_backend(name)
    rows = []
    for n_rows, n_cols in shapes:
        rng = f2.make_rng(12345)
        mats = [f2.sample_uniform(n_rows, n_cols, rng) for _ in range(64)]
        t0 = time.perf_counter()
        done = 0
        while done < trials:
            for m in mats:
                f2.rank(m)
            done += len(mats)
        per = (time.perf_counter() - t0) / done
        rows.append((f"rank {n_rows}x{n_cols}", per))
    rng = f2.make_rng(99)
    t0 = time.perf_counter()
    f2.nullity_histogram(200, 200, trials, rng)
    rows.append(("histogram 200x200", (time.perf_counter() - t0) / trials))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args()

    shapes = [(64, 64), (128, 128), (200, 200), (200, 260)]
    backends = ["python"]
    if f2._f2core is not None:
        backends.insert(0, "cython")
    results = {b: time_backend(b, shapes, args.trials) for b in backends}

    width = max(len(label) for label, _ in results[backends[0]])
    header = f"{'kernel':<{width}}" + "".join(f"{b:>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for i, (label, _) in enumerate(results[backends[0]]):
        line = f"{label:<{width}}"
        times = [results[b][i][1] for b in backends]
        for t in times:
            line += f"{t * 1e6:>12.1f}us"
        if len(times) == 2:
            line += f"{times[1] / times[0]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
