"""Adaptation and combination kernels for all implemented algorithms.

Each round follows adapt-then-combine semantics with a synchronous barrier:
every node adapts on the iteration's data first, then every node combines the
iteration's intermediate estimates from its neighbourhood.  No node ever sees
a neighbour's post-combination value within the same round.
"""

import enum
from dataclasses import dataclass, replace

import numpy as np

from .compression import DivergenceError, MeasurementMatrix, PhiOptimizerState, phi_update
from .metrics import QuantizerSpec, quantize
from .recovery import OmpConfig, omp_reconstruct

__all__ = ["AlgorithmKind", "NodeState", "NetworkState", "RoundInputs",
           "nlms_adapt", "za_nlms_adapt", "dce_adapt", "combine",
           "run_round", "finalize_dce"]


class AlgorithmKind(enum.Enum):
    """The algorithm set compared by the simulator."""

    DIFFUSION_NLMS = "dNLMS"
    SPARSE_DIFFUSION_NLMS = "sparse_dNLMS"
    DCE = "DCE"
    DCE_OPTIMIZED_PHI = "DCE_phi_opt"

    @property
    def compressed(self):
        """True when the working dimension is D instead of M."""
        return self in (AlgorithmKind.DCE, AlgorithmKind.DCE_OPTIMIZED_PHI)

    @classmethod
    def from_name(cls, name):
        for kind in cls:
            if kind.value == name:
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown algorithm {name!r}; expected one of: {valid}")


@dataclass(frozen=True)
class NodeState:
    """One node's running estimate, intermediate estimate, and step size."""

    node_id: int
    omega: np.ndarray
    psi: np.ndarray
    mu0: float = 0.45
    eps: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.mu0 < 2.0:
            raise ValueError("mu0 must lie in (0, 2) for NLMS stability")
        if self.eps < 0.0:
            raise ValueError("eps must be >= 0")
        omega = np.asarray(self.omega, dtype=np.complex128)
        psi = np.asarray(self.psi, dtype=np.complex128)
        if omega.shape != psi.shape:
            raise ValueError("omega and psi must have the same length")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "psi", psi)

    @classmethod
    def initial(cls, node_id, dim, mu0=0.45, eps=1e-8):
        zero = np.zeros(dim, dtype=np.complex128)
        return cls(node_id=node_id, omega=zero, psi=zero.copy(),
                   mu0=mu0, eps=eps)


@dataclass(frozen=True)
class NetworkState:
    """All node states plus the shared combination weights for one algorithm."""

    kind: AlgorithmKind
    nodes: tuple
    weights: np.ndarray
    phis: np.ndarray | None = None   # (N, D, M) for compressed kinds
    rho: float = 0.0
    eta: float = 0.0
    shared_phi: bool = False
    omp: OmpConfig | None = None
    quantizer: QuantizerSpec | None = None

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        n = len(self.nodes)
        if weights.shape != (n, n):
            raise ValueError("weights shape must be (n_nodes, n_nodes)")
        if self.kind.compressed:
            if self.phis is None:
                raise ValueError(f"{self.kind.value} requires per-node matrices")
            phis = np.asarray(self.phis, dtype=np.complex128)
            if phis.shape[0] != n:
                raise ValueError("phis must carry one matrix per node")
            object.__setattr__(self, "phis", phis)
        if self.kind is AlgorithmKind.DCE_OPTIMIZED_PHI and self.omp is None:
            raise ValueError("the optimized kind needs an OmpConfig for feedback")

    @property
    def n_nodes(self):
        return len(self.nodes)


@dataclass(frozen=True)
class RoundInputs:
    """Per-node data for one iteration.

    x holds the raw length-M regressor of every node.  For the fixed
    measurement models, d carries the precomputed scalar measurements.  The
    matrix-optimizing kind regenerates its own measurements through the
    current matrices when d is omitted, which requires noise and the true
    parameter coefficients.
    """

    x: np.ndarray
    d: np.ndarray | None = None
    noise: np.ndarray | None = None
    omega0: np.ndarray | None = None


def _adapt(omega, x, d, mu0, eps, rho=0.0):
    e = d - np.vdot(omega, x)
    mu = mu0 / (np.real(np.vdot(x, x)) + eps)
    psi = omega + mu * np.conj(e) * x
    if rho != 0.0:
        psi = psi - rho * (np.sign(omega.real) + 1j * np.sign(omega.imag))
    return psi, e


def nlms_adapt(state, x, d):
    """Normalized-LMS adaptation: psi = omega + mu0/(x^H x + eps) e* x."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != state.omega.shape:
        raise ValueError("regressor length does not match the node state")
    psi, _e = _adapt(state.omega, x, d, state.mu0, state.eps)
    return replace(state, psi=psi)

def za_nlms_adapt(state, x, d, rho):
    """Zero-attracting NLMS: the NLMS step followed by componentwise
    shrinkage rho * csign(omega) applied to real and imaginary parts
    independently.  rho = 0 reduces exactly to nlms_adapt."""
    if rho < 0.0:
        raise ValueError("rho must be >= 0")
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != state.omega.shape:
        raise ValueError("regressor length does not match the node state")
    psi, _e = _adapt(state.omega, x, d, state.mu0, state.eps, rho)
    return replace(state, psi=psi)

def dce_adapt(state, x_bar, d):
    """Compressed-domain NLMS adaptation (working dimension D)."""
    return nlms_adapt(state, x_bar, d)


def combine(psis, weights):
    """Convex combination sum_l weights[l] * psis[l] over a neighbourhood."""
    weights = np.asarray(weights, dtype=float)
    if len(psis) != weights.shape[0]:
        raise ValueError("one weight per neighbour estimate is required")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("neighbourhood weights must sum to 1")
    lengths = {np.asarray(p).shape[0] for p in psis}
    if len(lengths) > 1:
        raise ValueError("all neighbour estimates must have the same length")
    out = np.zeros(lengths.pop(), dtype=np.complex128)
    for w, psi in zip(weights, psis):
        out += w * np.asarray(psi, dtype=np.complex128)
    return out


def _exchange_and_combine(net, psis):
    """Neighbour exchange with optional quantization of transmitted vectors."""
    n = net.n_nodes
    if net.quantizer is not None:
        sent = [quantize(p, net.quantizer) for p in psis]
    else:
        sent = psis
    combined = []
    for k in range(n):
        row = net.weights[k]
        acc = np.zeros_like(psis[k])
        for l in range(n):
            if row[l] == 0.0:
                continue
            contrib = psis[l] if l == k else sent[l]
            acc = acc + row[l] * contrib
        combined.append(acc)
    return combined


def run_round(net, inputs, data_mode="compressed_consistent"):
    """One synchronous adapt / exchange / combine round for every node.

    Returns (updated NetworkState, per-node a-priori errors).  For the
    matrix-optimizing kind each node additionally reconstructs a sparse
    full-dimension estimate from its newly combined compressed estimator via
    OMP and forms one measurement-matrix increment from the round's
    compressed regressor and filter output; the step passed to phi_update is
    normalized by the increment's rank-1 regressor energy, which keeps any
    eta < 2 stable.  With shared_phi the per-node increments are averaged
    onto the single network-wide matrix; otherwise each node updates its own.
    """
    kind = net.kind
    n = net.n_nodes
    x = np.asarray(inputs.x, dtype=np.complex128)
    if x.shape[0] != n:
        raise ValueError("one regressor row per node is required")

    xbars = None
    if kind.compressed:
        xbars = np.stack([net.phis[0 if net.shared_phi else k] @ x[k]
                          for k in range(n)])

    if inputs.d is not None:
        d = np.asarray(inputs.d, dtype=np.complex128)
    else:
        if kind is not AlgorithmKind.DCE_OPTIMIZED_PHI:
            raise ValueError("precomputed measurements d are required")
        if data_mode != "compressed_consistent":
            raise ValueError("self-measuring rounds exist only in the "
                             "compressed_consistent data mode")
        if inputs.noise is None or inputs.omega0 is None:
            raise ValueError("self-measuring rounds need noise and omega0")
        omega0 = np.asarray(inputs.omega0, dtype=np.complex128)
        d = np.empty(n, dtype=np.complex128)
        for k in range(n):
            obar = net.phis[0 if net.shared_phi else k] @ omega0
            d[k] = np.vdot(obar, xbars[k]) + inputs.noise[k]

    rho = net.rho if kind is AlgorithmKind.SPARSE_DIFFUSION_NLMS else 0.0
    psis = []
    errors = np.empty(n, dtype=np.complex128)
    for k in range(n):
        node = net.nodes[k]
        row_in = xbars[k] if kind.compressed else x[k]
        psi, e = _adapt(node.omega, row_in, d[k], node.mu0, node.eps, rho)
        psis.append(psi)
        errors[k] = e

    combined = _exchange_and_combine(net, psis)
    new_nodes = [replace(net.nodes[k], omega=combined[k], psi=psis[k])
                 for k in range(n)]

    new_phis = net.phis
    if kind is AlgorithmKind.DCE_OPTIMIZED_PHI:
        opt = PhiOptimizerState(eta=net.eta, phis=net.phis)
        if net.shared_phi:
            base = opt.matrix(0)
            incr = np.zeros_like(base.entries)
            for k in range(n):
                omega_re = omp_reconstruct(base, new_nodes[k].omega, net.omp)
                y = d[k] - errors[k]
                eff = _normalized_matrix_step(opt.eta, xbars[k], omega_re,
                                              net.nodes[k].eps)
                incr += phi_update(base, xbars[k], y, omega_re, eff).entries \
                    - base.entries
            updated = np.repeat((base.entries + incr / n)[None, :, :], n,
                                axis=0)
        else:
            updated = np.empty_like(net.phis)
            for k in range(n):
                omega_re = omp_reconstruct(opt.matrix(k), new_nodes[k].omega,
                                           net.omp)
                y = d[k] - errors[k]
                eff = _normalized_matrix_step(opt.eta, xbars[k], omega_re,
                                              net.nodes[k].eps)
                updated[k] = phi_update(opt.matrix(k), xbars[k], y,
                                        omega_re, eff).entries
        new_phis = updated

    new_net = replace(net, nodes=tuple(new_nodes), phis=new_phis)
    return new_net, errors


def _normalized_matrix_step(eta, x_bar, omega_re, eps):
    energy = (np.real(np.vdot(x_bar, x_bar))
              * np.real(np.vdot(omega_re, omega_re)))
    return eta / (energy + eps)


def finalize_dce(net, omp_config=None):
    """Decompress every node's compressed estimator back to M dimensions."""
    if not net.kind.compressed:
        raise ValueError("finalize_dce applies to compressed kinds only")
    config = omp_config if omp_config is not None else net.omp
    if config is None:
        raise ValueError("an OmpConfig is required for decompression")
    out = []
    for k in range(net.n_nodes):
        phi = MeasurementMatrix(entries=net.phis[k])
        out.append(omp_reconstruct(phi, net.nodes[k].omega, config))
    return out
