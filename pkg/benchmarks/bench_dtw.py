"""Benchmark the compiled DTW kernel against the pure-Python fallback.

Imports both kernels directly, so one process measures both regardless
of which backend the package selected at import. Every timed pair is
also checked for exact agreement between the two implementations.

Usage: python3 benchmarks/bench_dtw.py [--lengths 64,128,256,512]
       [--repeats 5] [--band N] [--seed 0]
"""

import argparse
import statistics
import time

import numpy as np

from imputeaudit.signal_math import BACKEND
from imputeaudit.signal_math._dtw_py import dtw as dtw_python

try:
    from imputeaudit.signal_math._dtw_kernel import dtw as dtw_compiled
except ImportError:
    dtw_compiled = None


def time_call(fn, *args, repeats):
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lengths", default="64,128,256,512",
                        help="comma-separated series lengths")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per length (median wins)")
    parser.add_argument("--band", type=int, default=None,
                        help="band radius; default unbanded")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    lengths = [int(v) for v in args.lengths.split(",")]
    band = -1 if args.band is None else args.band
    print(f"active package backend: {BACKEND}")
    if dtw_compiled is None:
        print("compiled kernel unavailable; timing the fallback only")
    header = f"{'length':>8} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))

    rng = np.random.default_rng(args.seed)
    for n in lengths:
        a = rng.normal(0.0, 1.0, n)
        b = rng.normal(0.0, 1.0, n)
        t_py = time_call(dtw_python, a.tolist(), b.tolist(), False, band,
                         repeats=args.repeats)
        if dtw_compiled is None:
            print(f"{n:>8} {t_py * 1e3:>10.2f}ms {'-':>12} {'-':>9}")
            continue
        t_c = time_call(dtw_compiled, a, b, False, band,
                        repeats=args.repeats)
        got_py = dtw_python(a.tolist(), b.tolist(), False, band)
        got_c = dtw_compiled(a, b, False, band)
        if got_py != got_c:
            print(f"MISMATCH at length {n}: python {got_py!r} "
                  f"vs compiled {got_c!r}")
            return 1
        print(f"{n:>8} {t_py * 1e3:>10.2f}ms {t_c * 1e3:>10.2f}ms "
              f"{t_py / t_c:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
