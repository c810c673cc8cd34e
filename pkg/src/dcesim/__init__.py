"""Distributed compressed estimation over simulated wireless sensor networks.

Diffusion NLMS baselines, compressed-domain adaptation with OMP
decompression, online measurement-matrix optimization, and a deterministic
Monte-Carlo harness producing CSV traces.
"""

from .compression import (DivergenceError, MeasurementMatrix,
                          PhiOptimizerState, compress, init_gaussian,
                          phi_update)
from .estimators import (AlgorithmKind, NetworkState, NodeState, RoundInputs,
                         combine, dce_adapt, finalize_dce, nlms_adapt,
                         run_round, za_nlms_adapt)
from .harness import (ConfigError, ExperimentConfig, RngPlan, load_config,
                      run_experiment, run_sweep, save_config, write_csv,
                      write_sweep_csv)
from .kernels import BACKEND
from .metrics import (ExperimentTrace, QuantizerSpec, bits_per_round,
                      coefficients_per_round, mse_curve, msd, quantize)
from .recovery import OmpConfig, omp_reconstruct
from .signal import (NoiseModel, RegressorState, SparseVector,
                     generate_ground_truth, measure_compressed, measure_full,
                     regressor_step)
from .topology import (CombinationMatrix, Topology, generate_topology,
                       metropolis_weights)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmKind", "BACKEND", "CombinationMatrix", "ConfigError",
    "DivergenceError", "ExperimentConfig", "ExperimentTrace",
    "MeasurementMatrix", "NetworkState", "NodeState", "NoiseModel",
    "OmpConfig", "PhiOptimizerState", "QuantizerSpec", "RegressorState",
    "RngPlan", "RoundInputs", "SparseVector", "Topology",
    "bits_per_round", "coefficients_per_round", "combine", "compress",
    "dce_adapt", "finalize_dce", "generate_ground_truth",
    "generate_topology", "init_gaussian", "load_config", "measure_compressed",
    "measure_full", "metropolis_weights", "mse_curve", "msd", "nlms_adapt",
    "omp_reconstruct", "phi_update", "quantize", "regressor_step",
    "run_experiment", "run_round", "run_sweep", "save_config", "write_csv",
    "write_sweep_csv", "za_nlms_adapt",
]
