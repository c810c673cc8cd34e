"""Per-run simulation engine.

Generates every run's random realizations from counted seed streams, then
drives the kernel-level simulators.  All enabled algorithms within a run
consume the same regressor, noise, ground-truth and initial-matrix
realizations (and, for the fixed measurement models, the very same scalar
measurement array), so learning curves are paired comparisons.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .estimators import AlgorithmKind
from .signal import complex_gaussian, generate_ground_truth
from .topology import Topology, generate_topology, metropolis_weights

# Purpose tags for the counted RNG streams.
PURPOSE_TOPOLOGY = 0
PURPOSE_GROUND_TRUTH = 1
PURPOSE_PHI = 2
PURPOSE_ALPHA = 3
PURPOSE_REGRESSOR = 4
PURPOSE_NOISE = 5


@dataclass(frozen=True)
class RngPlan:
    """Independent random streams addressed by (run, purpose, node).

    Each stream seeds a fresh PCG64 generator from the hashed tuple
    (master_seed, run, purpose, node), so distinct addresses never overlap
    and any run can be regenerated in isolation -- the basis for bit-exact
    agreement between sequential and run-parallel execution.
    """

    master_seed: int

    def stream(self, run, purpose, node=0):
        seq = np.random.SeedSequence((self.master_seed, run, purpose, node))
        return np.random.default_rng(seq)


@dataclass
class RunData:
    """One run's shared realizations, consumed by every algorithm."""

    topology: Topology
    weights: np.ndarray      # (N, N) Metropolis combination matrix
    omega0: object           # SparseVector ground truth
    phis0: np.ndarray        # (N, D, M) initial measurement matrices
    alphas: np.ndarray       # (N,) AR(1) correlation coefficients
    xs_pad: np.ndarray       # (N, I+M-1) scalar inputs, left-padded with zeros
    noise: np.ndarray        # (N, I)
    xbars: np.ndarray        # (N, I, D) compressed regressors under phis0
    d: np.ndarray            # (N, I) canonical scalar measurements


def generate_run_data(config, plan, run):
    if config.topology_adjacency:
        topo = Topology.from_adjacency_lines(config.topology_adjacency)
    else:
        topo = generate_topology(config.n_nodes, config.link_probability,
                                 plan.stream(run, PURPOSE_TOPOLOGY))
    weights = metropolis_weights(topo).weights

    omega0 = generate_ground_truth(config.m, config.s,
                                   plan.stream(run, PURPOSE_GROUND_TRUTH),
                                   config.real_valued)

    n, m, d_dim, n_iter = config.n_nodes, config.m, config.d, config.iterations
    var = 1.0 / d_dim
    if config.phi_mode == "shared":
        shared = complex_gaussian(plan.stream(run, PURPOSE_PHI, 0),
                                  (d_dim, m), var, config.real_valued)
        phis0 = np.repeat(shared[None, :, :], n, axis=0)
    else:
        phis0 = np.stack([
            complex_gaussian(plan.stream(run, PURPOSE_PHI, k),
                             (d_dim, m), var, config.real_valued)
            for k in range(n)
        ])

    lo, hi = config.alpha_range
    alphas = plan.stream(run, PURPOSE_ALPHA).uniform(lo, hi, n)

    xs_pad = np.zeros((n, n_iter + m - 1), dtype=np.complex128)
    for k in range(n):
        var_u = 1.0 - abs(alphas[k]) ** 2
        u = complex_gaussian(plan.stream(run, PURPOSE_REGRESSOR, k),
                             n_iter, var_u, config.real_valued)
        xs_pad[k, m - 1:] = kernels.ar1_series(u, alphas[k])

    noise = np.stack([
        complex_gaussian(plan.stream(run, PURPOSE_NOISE, k),
                         n_iter, config.noise_variance, config.real_valued)
        for k in range(n)
    ])

    xbars = kernels.compress_series(xs_pad, phis0, m)
    if config.data_mode == "compressed_consistent":
        obar0 = np.stack([kernels.matvec(phis0[k], omega0.coeffs)
                          for k in range(n)])
        d = kernels.measure_series_compressed(xbars, obar0, noise)
    else:
        w = np.repeat(omega0.coeffs[None, :], n, axis=0)
        d = kernels.measure_series_full(xs_pad, w, noise, m)

    return RunData(topology=topo, weights=weights, omega0=omega0,
                   phis0=phis0, alphas=alphas, xs_pad=xs_pad, noise=noise,
                   xbars=xbars, d=d)


@dataclass
class AlgoRunResult:
    err2: np.ndarray            # (I, N) squared a-priori error magnitudes
    final_full: np.ndarray      # (N, M) final full-dimension estimates
    final_msd: np.ndarray       # (N,) squared deviations from the ground truth
    diverged: bool


def _quant_args(config):
    q = config.quantizer
    if q is None:
        return False, 1, 1, 1.0
    return True, q.bits_real, q.bits_imag, q.clip


def simulate_algorithm(config, data, kind):
    """Run one algorithm over one run's data and return its traces."""
    qon, qbr, qbi, qclip = _quant_args(config)
    mu0, eps = config.mu0, config.eps
    diverged = False

    if kind in (AlgorithmKind.DIFFUSION_NLMS,
                AlgorithmKind.SPARSE_DIFFUSION_NLMS):
        rho = config.shrinkage if kind is AlgorithmKind.SPARSE_DIFFUSION_NLMS else 0.0
        err2, finals = kernels.run_full_dim(
            data.xs_pad, data.d, data.weights, mu0, eps, rho, config.m,
            qon, qbr, qbi, qclip)
    elif kind is AlgorithmKind.DCE:
        err2, omegabs = kernels.run_compressed_fixed(
            data.xbars, data.d, data.weights, mu0, eps,
            qon, qbr, qbi, qclip)
        finals = kernels.decompress_all(
            data.phis0, omegabs, config.s, config.omp_residual_tol,
            kernels.OMP_RANK_RTOL)
    elif kind is AlgorithmKind.DCE_OPTIMIZED_PHI:
        phis = data.phis0.copy()
        use_ext = config.data_mode != "compressed_consistent"
        shared = config.phi_mode == "shared"
        err2, omegabs, diverged = kernels.run_compressed_opt(
            data.xs_pad, data.omega0.coeffs, phis, data.noise, data.d,
            use_ext, shared, data.weights, mu0, eps, config.eta,
            config.s, config.omp_residual_tol, kernels.OMP_RANK_RTOL,
            kernels.PHI_DIVERGENCE_LIMIT, qon, qbr, qbi, qclip)
        if diverged:
            finals = np.zeros((config.n_nodes, config.m), dtype=np.complex128)
        else:
            finals = kernels.decompress_all(
                phis, omegabs, config.s, config.omp_residual_tol,
                kernels.OMP_RANK_RTOL)
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unhandled algorithm kind {kind}")

    diff = finals - data.omega0.coeffs[None, :]
    final_msd = np.real(np.einsum("kj,kj->k", np.conj(diff), diff))
    return AlgoRunResult(err2=err2, final_full=finals,
                         final_msd=final_msd, diverged=diverged)


def simulate_run(config, plan, run, kinds):
    """All enabled algorithms on the run's shared data."""
    data = generate_run_data(config, plan, run)
    return {kind.value: simulate_algorithm(config, data, kind)
            for kind in kinds}
