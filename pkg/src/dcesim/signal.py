"""Sparse ground truth, AR(1) regressors, noise, and scalar measurements."""

import csv
from dataclasses import dataclass, replace

import numpy as np

__all__ = ["SparseVector", "RegressorState", "NoiseModel",
           "generate_ground_truth", "regressor_step",
           "measure_full", "measure_compressed",
           "complex_gaussian", "save_vector_csv", "load_vector_csv"]


def complex_gaussian(rng, size, variance=1.0, real_valued=False):
    """Zero-mean Gaussian samples of the given total variance.

    Circular complex by default (variance split between the parts); with
    real_valued the imaginary part is zeroed at the source and the full
    variance goes to the real part.
    """
    if real_valued:
        return rng.standard_normal(size) * np.sqrt(variance) + 0.0j
    scale = np.sqrt(variance / 2.0)
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * scale


@dataclass(frozen=True)
class SparseVector:
    """Length-M parameter vector with exactly len(support) nonzero entries."""

    coeffs: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        support = np.asarray(self.support, dtype=np.int64)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "support", support)
        m = coeffs.shape[0]
        if support.size != np.unique(support).size:
            raise ValueError("support indices must be distinct")
        if support.size and (support.min() < 0 or support.max() >= m):
            raise ValueError("support indices must lie in [0, M)")
        nz = np.flatnonzero(coeffs)
        if sorted(nz.tolist()) != sorted(support.tolist()):
            raise ValueError("nonzero pattern must match the support")

    @property
    def m(self):
        return self.coeffs.shape[0]

    @property
    def sparsity(self):
        return int(self.support.size)


@dataclass(frozen=True)
class RegressorState:
    """Per-node AR(1) input state: delay-line buffer plus the last scalar."""

    node_id: int
    alpha: float
    buffer: np.ndarray
    last_scalar: complex = 0.0 + 0.0j

    def __post_init__(self):
        if not abs(self.alpha) < 1.0:
            raise ValueError("|alpha| must be < 1 for stationarity")
        object.__setattr__(self, "buffer",
                           np.asarray(self.buffer, dtype=np.complex128))

    @classmethod
    def initial(cls, node_id, alpha, m):
        return cls(node_id=node_id, alpha=alpha,
                   buffer=np.zeros(m, dtype=np.complex128))


@dataclass(frozen=True)
class NoiseModel:
    """Additive measurement noise with per-node variance."""

    variance: float

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError("variance must be >= 0")

    def sample(self, rng, size, real_valued=False):
        return complex_gaussian(rng, size, self.variance, real_valued)


def generate_ground_truth(m, s, rng, real_valued=False):
    """Sparse parameter vector with s nonzeros of unit average power.

    The support is drawn uniformly without replacement; nonzero values are
    circular complex Gaussian with E|w|^2 = 1 so the measurement SNR is set
    by the noise variance alone.
    """
    if not 0 <= s <= m:
        raise ValueError(f"invalid sparsity: need 0 <= s <= m, got s={s}, m={m}")
    support = np.sort(rng.choice(m, size=s, replace=False)).astype(np.int64)
    coeffs = np.zeros(m, dtype=np.complex128)
    coeffs[support] = complex_gaussian(rng, s, 1.0, real_valued)
    return SparseVector(coeffs=coeffs, support=support)


def regressor_step(state, rng, real_valued=False):
    """Advance the AR(1) input process one sample.

    x(i) = u(i) + alpha * x(i-1) with white innovation variance 1 - |alpha|^2,
    which makes the process unit-variance stationary.  The new scalar enters
    the buffer head; the oldest sample drops off.
    """
    var_u = 1.0 - abs(state.alpha) ** 2
    u = complex(complex_gaussian(rng, (), var_u, real_valued))
    new = u + state.alpha * state.last_scalar
    buffer = np.empty_like(state.buffer)
    buffer[0] = new
    buffer[1:] = state.buffer[:-1]
    return replace(state, buffer=buffer, last_scalar=new)


def save_vector_csv(coeffs, path):
    """Dump a complex vector as (index, real, imag) CSV rows."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "real", "imag"])
        for i, v in enumerate(coeffs):
            writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def load_vector_csv(path):
    """Read a complex vector written by save_vector_csv."""
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"index", "real", "imag"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(required)}")
        for rec in reader:
            entries[int(rec["index"])] = float(rec["real"]) + 1j * float(rec["imag"])
    if not entries:
        raise ValueError(f"{path}: no vector entries")
    out = np.zeros(max(entries) + 1, dtype=np.complex128)
    for i, v in entries.items():
        out[i] = v
    return out


def measure_full(omega0, x, noise):
    """Scalar measurement omega0^H x + noise in the full dimension."""
    x = np.asarray(x)
    if x.shape[0] != omega0.m:
        raise ValueError("regressor length does not match the parameter size")
    return complex(np.vdot(omega0.coeffs, x) + noise)


def measure_compressed(omega0, phi, x_bar, noise):
    """Scalar measurement (phi @ omega0)^H x_bar + noise in the compressed domain."""
    x_bar = np.asarray(x_bar)
    entries = phi.entries
    if entries.shape[1] != omega0.m:
        raise ValueError("matrix width does not match the parameter size")
    if x_bar.shape[0] != entries.shape[0]:
        raise ValueError("compressed regressor length does not match the matrix")
    omega_bar = entries @ omega0.coeffs
    return complex(np.vdot(omega_bar, x_bar) + noise)
