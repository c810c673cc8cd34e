#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own subprocess (the backend is fixed at import
time).  The numba timing excludes JIT compilation by doing a warm-up pass.

Usage: python benchmarks/bench_backends.py [--runs N] [--iterations I]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import dcesim
from dcesim.harness import ExperimentConfig, run_experiment

runs, iterations = int(sys.argv[1]), int(sys.argv[2])
cfg = ExperimentConfig(n_nodes=10, m=50, d=10, s=3, iterations=iterations,
                       runs=runs, link_probability=0.3, seed=7)
warm = ExperimentConfig(n_nodes=4, m=50, d=10, s=3, iterations=5, runs=1,
                        link_probability=0.9, seed=7)
run_experiment(warm)   # trigger JIT compilation / warm caches
start = time.perf_counter()
run_experiment(cfg)
elapsed = time.perf_counter() - start
print(json.dumps({"backend": dcesim.BACKEND, "seconds": elapsed}))
"""


def time_backend(flag, runs, iterations):
    env = dict(os.environ, DCESIM_NUMBA=flag)
    proc = subprocess.run(
        [sys.executable, "-c", CHILD, str(runs), str(iterations)],
        capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--runs", type=int, default=4)
    parser.add_argument("--iterations", type=int, default=200)
    args = parser.parse_args()

    results = [time_backend("1", args.runs, args.iterations),
               time_backend("0", args.runs, args.iterations)]
    print(f"\n{args.runs} runs x {args.iterations} iterations, "
          f"10 nodes, M=50, D=10, all four algorithms")
    print(f"{'backend':10s} {'seconds':>10s}")
    for res in results:
        print(f"{res['backend']:10s} {res['seconds']:10.2f}")
    if results[0]["backend"] != results[1]["backend"]:
        speedup = results[1]["seconds"] / results[0]["seconds"]
        print(f"\nspeedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
