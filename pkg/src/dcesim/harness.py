"""Experiment configuration, Monte-Carlo orchestration, and CSV output."""

import configparser
import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from ._engine import RngPlan, simulate_run
from .estimators import AlgorithmKind
from .metrics import (ExperimentTrace, QuantizerSpec, bits_per_round,
                      coefficients_per_round, mse_curve)
from .topology import Topology

__all__ = ["ExperimentConfig", "ConfigError", "RngPlan",
           "load_config", "save_config", "run_experiment",
           "run_sweep", "SweepResult", "SweepCell",
           "write_csv", "write_sweep_csv", "DEFAULT_SWEEP"]

# (d, s, bits) grid for the dimension/resolution study; a calibration choice.
# Redundancy d/s shrinks along the grid so recovery difficulty rises with s.
DEFAULT_SWEEP = tuple((d, s, bits)
                      for d, s in ((10, 3), (14, 5), (18, 7), (22, 9))
                      for bits in (4, 8, 16))

_PHI_MODES = ("shared", "per_node")
_DATA_MODES = ("compressed_consistent", "physical")


class ConfigError(ValueError):
    """Invalid experiment configuration (parse failure or constraint violation)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment description.  Defaults reproduce the reference scenario."""

    n_nodes: int = 20
    m: int = 50
    d: int = 10
    s: int = 3
    iterations: int = 500
    runs: int = 50
    mu0: float = 0.45
    eta: float = 0.08
    shrinkage: float = 0.001
    eps: float = 1e-8
    noise_variance: float = 0.001
    link_probability: float = 0.2
    alpha_range: tuple = (0.0, 0.5)
    algorithms: tuple = ("dNLMS", "sparse_dNLMS", "DCE", "DCE_phi_opt")
    phi_mode: str = "shared"
    data_mode: str = "compressed_consistent"
    real_valued: bool = False
    quantizer: QuantizerSpec | None = None
    sweep: tuple | None = None
    sweep_algorithms: tuple = ("DCE",)
    omp_residual_tol: float = 1e-9
    seed: int = 12345
    workers: int = 1
    topology_adjacency: str | None = None
    dump_ground_truth: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha_range", tuple(self.alpha_range))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        object.__setattr__(self, "sweep_algorithms", tuple(self.sweep_algorithms))
        if self.sweep is not None:
            object.__setattr__(self, "sweep",
                               tuple(tuple(cell) for cell in self.sweep))
        self._validate()

    def _validate(self):
        def fail(msg):
            raise ConfigError(msg)

        if self.n_nodes < 1:
            fail("n_nodes must be >= 1")
        if not 0 <= self.s <= self.d <= self.m:
            fail(f"need 0 <= s <= d <= m, got s={self.s}, d={self.d}, m={self.m}")
        if self.iterations < 1:
            fail("iterations must be >= 1")
        if self.runs < 1:
            fail("runs must be >= 1")
        if not 0.0 < self.mu0 < 2.0:
            fail("mu0 must lie in (0, 2)")
        if self.eta < 0.0:
            fail("eta must be >= 0")
        if self.shrinkage < 0.0:
            fail("shrinkage must be >= 0")
        if self.eps < 0.0:
            fail("eps must be >= 0")
        if self.noise_variance < 0.0:
            fail("noise_variance must be >= 0")
        if not 0.0 < self.link_probability <= 1.0:
            fail("link_probability must be in (0, 1]")
        lo, hi = self.alpha_range
        if not (0.0 <= lo <= hi < 1.0):
            fail("alpha_range must satisfy 0 <= lo <= hi < 1")
        if not self.algorithms:
            fail("at least one algorithm is required")
        for name in self.algorithms + self.sweep_algorithms:
            AlgorithmKind.from_name(name)
        if self.phi_mode not in _PHI_MODES:
            fail(f"phi_mode must be one of {_PHI_MODES}")
        if self.data_mode not in _DATA_MODES:
            fail(f"data_mode must be one of {_DATA_MODES}")
        if self.omp_residual_tol < 0.0:
            fail("omp_residual_tol must be >= 0")
        if self.seed < 0:
            fail("seed must be >= 0")
        if self.workers < 1:
            fail("workers must be >= 1")
        if self.sweep is not None:
            for cell in self.sweep:
                if len(cell) != 3:
                    fail(f"sweep cells are (d, s, bits) triples, got {cell}")
                d_, s_, bits = cell
                if not 0 <= s_ <= d_ <= self.m:
                    fail(f"sweep cell {cell}: need 0 <= s <= d <= m={self.m}")
                if bits < 1:
                    fail(f"sweep cell {cell}: bits must be >= 1")
        if self.topology_adjacency is not None:
            try:
                topo = Topology.from_adjacency_lines(self.topology_adjacency)
            except ValueError as exc:
                fail(f"bad topology block: {exc}")
            if topo.n_nodes != self.n_nodes:
                fail(f"topology block has {topo.n_nodes} nodes, "
                     f"config says {self.n_nodes}")
            object.__setattr__(self, "topology_adjacency",
                               topo.to_adjacency_lines())


_INT_KEYS = ("n_nodes", "m", "d", "s", "iterations", "runs", "seed", "workers")
_FLOAT_KEYS = ("mu0", "eta", "shrinkage", "eps", "noise_variance",
               "link_probability", "omp_residual_tol")
_BOOL_KEYS = ("real_valued", "dump_ground_truth")
_LIST_KEYS = ("algorithms", "sweep_algorithms")


def _parse_bool(raw, key):
    val = raw.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def load_config(path):
    """Read an INI-style experiment file; unset keys fall back to defaults."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    kwargs = {}
    if parser.has_section("experiment"):
        known = {f.name for f in fields(ExperimentConfig)}
        for key, raw in parser.items("experiment"):
            if key not in known or key in ("quantizer", "sweep",
                                           "topology_adjacency"):
                raise ConfigError(f"unknown experiment key: {key}")
            try:
                if key in _INT_KEYS:
                    kwargs[key] = int(raw)
                elif key in _FLOAT_KEYS:
                    kwargs[key] = float(raw)
                elif key in _BOOL_KEYS:
                    kwargs[key] = _parse_bool(raw, key)
                elif key in _LIST_KEYS:
                    kwargs[key] = tuple(raw.replace(",", " ").split())
                elif key == "alpha_range":
                    lo, hi = raw.replace(",", " ").split()
                    kwargs[key] = (float(lo), float(hi))
                else:
                    kwargs[key] = raw.strip()
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{key}: {exc}") from exc

    if parser.has_section("quantizer"):
        sect = parser["quantizer"]
        try:
            bits = int(sect.get("bits", "8"))
            clip = float(sect.get("clip", "1.0"))
            kwargs["quantizer"] = QuantizerSpec(bits_per_coefficient=bits,
                                                clip=clip)
        except ValueError as exc:
            raise ConfigError(f"quantizer: {exc}") from exc

    if parser.has_section("sweep"):
        raw = parser["sweep"].get("cells", "").strip()
        if raw:
            cells = []
            for line in raw.splitlines():
                toks = line.replace(",", " ").split()
                if len(toks) != 3:
                    raise ConfigError(f"sweep cell needs 'd s bits', got {line!r}")
                try:
                    cells.append(tuple(int(t) for t in toks))
                except ValueError as exc:
                    raise ConfigError(f"sweep cell {line!r}: {exc}") from exc
            kwargs["sweep"] = tuple(cells)

    if parser.has_section("topology"):
        block = parser["topology"].get("adjacency", "").strip()
        if block:
            kwargs["topology_adjacency"] = block

    try:
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def save_config(config, path):
    """Write a config file that load_config reads back to an equal object."""
    parser = configparser.ConfigParser()
    parser.add_section("experiment")
    exp = parser["experiment"]
    for key in _INT_KEYS:
        exp[key] = str(getattr(config, key))
    for key in _FLOAT_KEYS:
        exp[key] = repr(getattr(config, key))
    for key in _BOOL_KEYS:
        exp[key] = str(getattr(config, key)).lower()
    for key in _LIST_KEYS:
        exp[key] = " ".join(getattr(config, key))
    exp["alpha_range"] = " ".join(repr(v) for v in config.alpha_range)
    exp["phi_mode"] = config.phi_mode
    exp["data_mode"] = config.data_mode
    if config.quantizer is not None:
        parser.add_section("quantizer")
        parser["quantizer"]["bits"] = str(config.quantizer.bits_per_coefficient)
        parser["quantizer"]["clip"] = repr(config.quantizer.clip)
    if config.sweep is not None:
        parser.add_section("sweep")
        parser["sweep"]["cells"] = "\n" + "\n".join(
            f"{d} {s} {b}" for d, s, b in config.sweep)
    if config.topology_adjacency is not None:
        parser.add_section("topology")
        parser["topology"]["adjacency"] = "\n" + config.topology_adjacency
    with open(path, "w") as fh:
        parser.write(fh)


def run_experiment(config):
    """Monte-Carlo simulation of every enabled algorithm on paired data.

    Runs are independent and may execute in parallel (config.workers); each
    is fully determined by its own seed streams and results are aggregated
    in run order, so sequential and parallel execution agree bit for bit.
    """
    plan = RngPlan(config.seed)
    kinds = [AlgorithmKind.from_name(name) for name in config.algorithms]
    names = [k.value for k in kinds]
    R, I, N = config.runs, config.iterations, config.n_nodes

    trace = ExperimentTrace(algorithms=names, runs=R, iterations=I, n_nodes=N)
    for kind in kinds:
        name = kind.value
        trace.error_power[name] = np.zeros((R, I, N))
        trace.final_msd[name] = np.zeros((R, N))
        trace.valid_runs[name] = np.ones(R, dtype=bool)
        trace.coefficients_per_round[name] = coefficients_per_round(
            kind, config.m, config.d)
        if config.quantizer is not None:
            trace.bits_per_round[name] = bits_per_round(
                kind, config.m, config.d, config.quantizer)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(
                lambda r: simulate_run(config, plan, r, kinds), range(R)))
    else:
        results = [simulate_run(config, plan, r, kinds) for r in range(R)]

    for r, per_algo in enumerate(results):
        for name, res in per_algo.items():
            if res.diverged:
                trace.valid_runs[name][r] = False
                continue
            trace.error_power[name][r] = res.err2
            trace.final_msd[name][r] = res.final_msd
    return trace


@dataclass(frozen=True)
class SweepCell:
    algorithm: str
    d: int
    s: int
    bits: int
    final_mse_db: float
    per_run_db: np.ndarray


@dataclass(frozen=True)
class SweepResult:
    cells: tuple


def run_sweep(config):
    """Dimension/sparsity/resolution study over the configured cell grid.

    Each cell reruns the sweep algorithms at (d, s) with a bits-wide
    quantizer; the reported figure is the deviation of the final
    full-dimension estimates (decompressed for the compressed kinds) from the
    ground truth, in dB, averaged over nodes and valid runs.
    """
    cells_spec = config.sweep if config.sweep is not None else DEFAULT_SWEEP
    clip = config.quantizer.clip if config.quantizer is not None else 1.0
    by_algo = {name: [] for name in config.sweep_algorithms}
    for d_, s_, bits in cells_spec:
        sub = replace(config, d=d_, s=s_,
                      quantizer=QuantizerSpec(bits_per_coefficient=bits,
                                              clip=clip),
                      algorithms=tuple(config.sweep_algorithms),
                      sweep=None)
        trace = run_experiment(sub)
        for name in config.sweep_algorithms:
            valid = trace.valid_runs[name]
            msd_runs = trace.final_msd[name][valid]
            per_run_db = 10.0 * np.log10(msd_runs.mean(axis=1))
            final_db = 10.0 * np.log10(msd_runs.mean()) if valid.any() else np.nan
            by_algo[name].append(SweepCell(
                algorithm=name, d=d_, s=s_, bits=bits,
                final_mse_db=float(final_db), per_run_db=per_run_db))
    ordered = []
    for name in config.sweep_algorithms:
        ordered.extend(by_algo[name])
    return SweepResult(cells=tuple(ordered))


def _fmt(x):
    return repr(float(x))


def write_csv(trace, out_dir):
    """Write mse_curve.csv and msd.csv into out_dir; returns the paths.

    Row order is deterministic: algorithms in trace order, then iteration
    (respectively run, node).  Diverged runs carry no msd rows.
    """
    os.makedirs(out_dir, exist_ok=True)
    mse_path = os.path.join(out_dir, "mse_curve.csv")
    msd_path = os.path.join(out_dir, "msd.csv")
    curves = mse_curve(trace) if trace.algorithms else {}
    with open(mse_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "iteration", "mse_db", "runs_aggregated"])
        for name in trace.algorithms:
            curve = curves[name]
            runs_agg = trace.runs_aggregated(name)
            for i in range(trace.iterations):
                writer.writerow([name, i + 1, _fmt(curve[i]), runs_agg])
    with open(msd_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "run", "node", "msd"])
        for name in trace.algorithms:
            valid = trace.valid_runs[name]
            for r in range(trace.runs):
                if not valid[r]:
                    continue
                for k in range(trace.n_nodes):
                    writer.writerow([name, r, k,
                                     _fmt(trace.final_msd[name][r, k])])
    return mse_path, msd_path


def write_sweep_csv(sweep, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "d", "s", "bits", "final_mse_db"])
        for cell in sweep.cells:
            writer.writerow([cell.algorithm, cell.d, cell.s, cell.bits,
                             _fmt(cell.final_mse_db)])
    return path
