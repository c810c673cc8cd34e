"""Learning-curve aggregation, quantization, and transmission accounting."""

from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = ["ExperimentTrace", "QuantizerSpec", "mse_curve", "msd",
           "quantize", "bits_per_round", "coefficients_per_round",
           "per_run_steady_state_db", "first_crossing"]


@dataclass(frozen=True)
class QuantizerSpec:
    """Uniform mid-rise quantizer: b bits per complex coefficient over [-clip, clip].

    The bits are split floor(b/2) for the real part and ceil(b/2) for the
    imaginary part.
    """

    bits_per_coefficient: int
    clip: float = 1.0

    def __post_init__(self):
        if self.bits_per_coefficient < 1:
            raise ValueError("bits_per_coefficient must be >= 1")
        if self.clip <= 0.0:
            raise ValueError("clip must be > 0")

    @property
    def bits_real(self):
        return self.bits_per_coefficient // 2

    @property
    def bits_imag(self):
        return self.bits_per_coefficient - self.bits_per_coefficient // 2


@dataclass
class ExperimentTrace:
    """Per-run learning curves and final deviations for every algorithm.

    error_power[name] has shape (runs, iterations, n_nodes) and stores the
    squared a-priori error magnitudes |e_k(i)|^2.  final_msd[name] has shape
    (runs, n_nodes) with squared deviations of the final full-dimension
    estimates (decompressed for the compressed kinds) from the ground truth.
    valid_runs flags runs not excluded by a divergence abort.
    """

    algorithms: list
    runs: int
    iterations: int
    n_nodes: int
    error_power: dict = field(default_factory=dict)
    final_msd: dict = field(default_factory=dict)
    valid_runs: dict = field(default_factory=dict)
    coefficients_per_round: dict = field(default_factory=dict)
    bits_per_round: dict = field(default_factory=dict)

    def runs_aggregated(self, name):
        return int(np.count_nonzero(self.valid_runs[name]))


def mse_curve(trace):
    """Per-iteration network MSE in dB for every algorithm.

    MSE(i) = 10 log10( mean over valid runs and nodes of |e_k(i)|^2 ).
    """
    if not trace.algorithms:
        raise ValueError("empty trace")
    out = {}
    for name in trace.algorithms:
        valid = trace.valid_runs[name]
        if not valid.any():
            out[name] = np.full(trace.iterations, np.nan)
            continue
        power = trace.error_power[name][valid]
        out[name] = 10.0 * np.log10(power.mean(axis=(0, 2)))
    return out


def per_run_steady_state_db(trace, name, window=50):
    """Steady-state MSE per run: dB of the mean error power over the last
    `window` iterations and all nodes.  Returns one value per valid run."""
    valid = trace.valid_runs[name]
    power = trace.error_power[name][valid]
    if power.shape[1] < window:
        window = power.shape[1]
    tail = power[:, -window:, :]
    return 10.0 * np.log10(tail.mean(axis=(1, 2)))


def first_crossing(curve_db, threshold_db):
    """1-based index of the first curve value at or below the threshold, or -1."""
    below = np.flatnonzero(np.asarray(curve_db) <= threshold_db)
    return int(below[0]) + 1 if below.size else -1


def msd(estimate, omega0):
    """Squared deviation ||omega0 - estimate||^2."""
    estimate = np.asarray(estimate, dtype=np.complex128)
    coeffs = omega0.coeffs if hasattr(omega0, "coeffs") else np.asarray(omega0)
    if estimate.shape != coeffs.shape:
        raise ValueError("estimate length does not match the parameter size")
    diff = coeffs - estimate
    return float(np.real(np.vdot(diff, diff)))


def quantize(v, spec):
    """Quantize a complex vector part-wise with a uniform mid-rise quantizer."""
    v = np.asarray(v, dtype=np.complex128)
    flat = np.ascontiguousarray(v.reshape(1, -1))
    out = np.empty_like(flat)
    kernels.quantize_rows(flat, spec.bits_real, spec.bits_imag, spec.clip, out)
    return out.reshape(v.shape)


def _working_dim(kind, m, d):
    from .estimators import AlgorithmKind

    if isinstance(kind, str):
        kind = AlgorithmKind.from_name(kind)
    return d if kind.compressed else m


def coefficients_per_round(kind, m, d):
    """Complex coefficients each node transmits per round: D compressed, M full."""
    return _working_dim(kind, m, d)


def bits_per_round(kind, m, d, spec):
    """Bits each node transmits per round under the quantizer spec."""
    if spec.bits_per_coefficient < 1:
        raise ValueError("bits_per_coefficient must be >= 1")
    return _working_dim(kind, m, d) * spec.bits_per_coefficient
