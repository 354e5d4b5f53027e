"""Compare the numba and numpy candidate kernels.

Times a full sweep (all_values) and a worst-case first-improvement search
(no candidate improves) on random integer tables, for pivots with m other
indices. Also times end-to-end decide runs under each backend, switched by
the ARBOR_DISABLE_NUMBA flag in a fresh interpreter.

    python benchmarks/bench_kernels.py --m 5 6 7 8 9
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from arbor import kernels


def random_tables(m, seed):
    rng = np.random.default_rng(seed)
    single = rng.integers(0, 40, size=(m, 4)).astype(np.int64)
    pair = np.triu(np.ones((m, m)), 1)[:, :, None, None] * rng.integers(0, 40, size=(m, m, 4, 4))
    return int(rng.integers(0, 40)), single, pair.astype(np.int64)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(ms, repeat):
    rows = []
    for m in ms:
        base, single, pair = random_tables(m, m)
        # warm the JIT outside the timed region
        kernels.all_values_numba(base, single, pair)
        kernels.first_improvement_numba(base, single, pair, 0)
        ref = kernels.all_values_numpy(base, single, pair)
        assert np.array_equal(ref, kernels.all_values_numba(base, single, pair))
        row = {"m": m, "candidates": 4 ** m}
        row["sweep_numpy_s"] = best_of(lambda: kernels.all_values_numpy(base, single, pair), repeat)
        row["sweep_numba_s"] = best_of(lambda: kernels.all_values_numba(base, single, pair), repeat)
        row["search_numpy_s"] = best_of(lambda: kernels.first_improvement_numpy(base, single, pair, 0), repeat)
        row["search_numba_s"] = best_of(lambda: kernels.first_improvement_numba(base, single, pair, 0), repeat)
        rows.append(row)
    return rows


_DECIDE = """
import json, time
from arbor import kernels
from arbor.descent import decide
from arbor.harness import GenConfig, random_tuple
n, trials = {n}, {trials}
gens = [[g.matrix for g in random_tuple(GenConfig(3, 10, n, 1), t)] for t in range(trials)]
decide(gens[0], 3)
start = time.perf_counter()
for g in gens:
    decide(g, 3)
print(json.dumps({{"backend": kernels.BACKEND, "mean_s": (time.perf_counter() - start) / trials}}))
"""


def decide_rows(ns, trials):
    rows = []
    for n in ns:
        for disable in ("0", "1"):
            env = dict(os.environ, ARBOR_DISABLE_NUMBA=disable)
            out = subprocess.run(
                [sys.executable, "-c", _DECIDE.format(n=n, trials=trials)], env=env, capture_output=True, text=True, check=True
            )
            rows.append({"n": n, **json.loads(out.stdout)})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, nargs="+", default=[5, 6, 7, 8, 9])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--decide-n", type=int, nargs="*", default=[4, 6])
    ap.add_argument("--decide-trials", type=int, default=20)
    args = ap.parse_args(argv)
    if kernels.numba is None:
        sys.exit("numba is not installed")

    print(f"{'m':>3} {'cands':>8} {'sweep np':>10} {'sweep nb':>10} {'search np':>10} {'search nb':>10} {'speedup':>8}")
    for r in kernel_rows(args.m, args.repeat):
        print(
            f"{r['m']:>3} {r['candidates']:>8} {r['sweep_numpy_s']:>10.5f} {r['sweep_numba_s']:>10.5f}"
            f" {r['search_numpy_s']:>10.5f} {r['search_numba_s']:>10.5f} {r['search_numpy_s'] / r['search_numba_s']:>7.1f}x"
        )
    if args.decide_n:
        print("\ndecide, mean seconds per run")
        for r in decide_rows(args.decide_n, args.decide_trials):
            print(f"  n={r['n']} {r['backend']:>5}: {r['mean_s']:.4f}")


if __name__ == "__main__":
    main()
