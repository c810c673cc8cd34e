"""Command-line interface: simulate / recover / validate-config.

Exit codes: 0 success, 2 configuration error, 3 divergence left no usable runs.
"""

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from ._engine import PURPOSE_GROUND_TRUTH, RngPlan
from .compression import load_phi_csv
from .harness import (ConfigError, load_config, run_experiment, run_sweep,
                      write_csv, write_sweep_csv)
from .recovery import OmpConfig, omp_reconstruct
from .signal import generate_ground_truth, load_vector_csv, save_vector_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dcesim",
        description="Distributed compressed estimation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment and write CSV traces")
    sim.add_argument("--config", required=True, help="experiment config file")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override the seed")
    sim.add_argument("--runs", type=int, default=None, help="override the run count")
    sim.add_argument("--algos", default=None,
                     help="comma-separated algorithm list override")
    sim.add_argument("--sweep", action="store_true",
                     help="also run the dimension/resolution sweep")
    sim.add_argument("--workers", type=int, default=None,
                     help="override run-level parallelism")

    rec = sub.add_parser("recover", help="standalone sparse recovery (OMP)")
    rec.add_argument("--phi", required=True,
                     help="measurement matrix CSV (row, col, real, imag)")
    rec.add_argument("--input", required=True,
                     help="compressed vector CSV (index, real, imag)")
    rec.add_argument("--sparsity", type=int, required=True,
                     help="number of nonzeros to recover")
    rec.add_argument("--tol", type=float, default=1e-9,
                     help="residual norm early stop")
    rec.add_argument("--out", default=None,
                     help="output CSV path (default: stdout)")

    val = sub.add_parser("validate-config", help="check a config file")
    val.add_argument("path")
    return parser


def _apply_overrides(config, args):
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.algos is not None:
        overrides["algorithms"] = tuple(args.algos.replace(",", " ").split())
    return replace(config, **overrides) if overrides else config


def _cmd_simulate(args):
    try:
        config = _apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(args.out, exist_ok=True)

    if config.dump_ground_truth:
        plan = RngPlan(config.seed)
        for r in range(config.runs):
            vec = generate_ground_truth(
                config.m, config.s, plan.stream(r, PURPOSE_GROUND_TRUTH),
                config.real_valued)
            save_vector_csv(vec.coeffs,
                            os.path.join(args.out, f"ground_truth_run{r}.csv"))

    trace = run_experiment(config)
    mse_path, msd_path = write_csv(trace, args.out)
    print(f"wrote {mse_path}")
    print(f"wrote {msd_path}")
    for name in trace.algorithms:
        agg = trace.runs_aggregated(name)
        print(f"{name}: {agg}/{trace.runs} runs aggregated")
    if any(trace.runs_aggregated(name) == 0 for name in trace.algorithms):
        print("divergence left no usable runs for at least one algorithm",
              file=sys.stderr)
        return EXIT_DIVERGED

    if args.sweep:
        sweep = run_sweep(config)
        sweep_path = write_sweep_csv(sweep, os.path.join(args.out, "sweep.csv"))
        print(f"wrote {sweep_path}")
        if any(np.isnan(cell.final_mse_db) for cell in sweep.cells):
            print("divergence left no usable runs in at least one sweep cell",
                  file=sys.stderr)
            return EXIT_DIVERGED
    return EXIT_OK


def _cmd_recover(args):
    try:
        phi = load_phi_csv(args.phi)
        y = load_vector_csv(args.input)
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        config = OmpConfig(max_support=args.sparsity, residual_tol=args.tol)
        coeffs = omp_reconstruct(phi, y, config)
    except ValueError as exc:
        print(f"recovery error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        save_vector_csv(coeffs, args.out)
        print(f"wrote {args.out}")
    else:
        print("index,real,imag")
        for i, v in enumerate(coeffs):
            print(f"{i},{float(v.real)!r},{float(v.imag)!r}")
    return EXIT_OK


def _cmd_validate(args):
    try:
        config = load_config(args.path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"OK: N={config.n_nodes} M={config.m} D={config.d} S={config.s} "
          f"I={config.iterations} R={config.runs} seed={config.seed}")
    print(f"algorithms: {' '.join(config.algorithms)}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "recover":
        return _cmd_recover(args)
    return _cmd_validate(args)


def entry():  # console-script hook
    sys.exit(main())


if __name__ == "__main__":
    entry()
