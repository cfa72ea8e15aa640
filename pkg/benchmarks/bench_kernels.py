"""Compare the compiled kernels against the pure-Python reference.

Run:  python benchmarks/bench_kernels.py [--sizes 100 500 1000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

import numpy as np

from suffixsweep import kernels


def _time(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def bench_osa(backends: dict, sizes: list[int], repeat: int, rng: random.Random):
    print("osa_distance (edit distance, median seconds)")
    header = f"{'size':>8}" + "".join(f"{name:>14}" for name in backends)
    print(header)
    for size in sizes:
        a = np.array([rng.randrange(8) for _ in range(size)], dtype=np.int64)
        b = np.array([rng.randrange(8) for _ in range(size)], dtype=np.int64)
        row = f"{size:>8}"
        results = {}
        for name, mod in backends.items():
            results[name] = mod.osa_distance(a, b)
            row += f"{_time(lambda m=mod: m.osa_distance(a, b), repeat):>14.6f}"
        assert len(set(results.values())) == 1, f"backend disagreement: {results}"
        print(row)


def bench_count_active(backends: dict, sizes: list[int], repeat: int, rng: random.Random):
    print("\ncount_active (interval stabbing, median seconds, 1000 queries)")
    header = f"{'size':>8}" + "".join(f"{name:>14}" for name in backends)
    print(header)
    for size in sizes:
        starts = np.array(sorted(rng.randrange(10**6) for _ in range(size)), dtype=np.int64)
        ends = starts + np.array([rng.randrange(1, 10**4) for _ in range(size)], dtype=np.int64)
        queries = [rng.randrange(10**6) for _ in range(1000)]
        row = f"{size:>8}"
        results = {}
        for name, mod in backends.items():
            results[name] = sum(mod.count_active(starts, ends, q) for q in queries)
            row += f"{_time(lambda m=mod: [m.count_active(starts, ends, q) for q in queries], repeat):>14.6f}"
        assert len(set(results.values())) == 1, f"backend disagreement: {results}"
        print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 500, 2000])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}\n")
    rng = random.Random(args.seed)
    bench_osa(backends, args.sizes, args.repeat, rng)
    bench_count_active(backends, args.sizes, args.repeat, rng)


if __name__ == "__main__":
    main()
