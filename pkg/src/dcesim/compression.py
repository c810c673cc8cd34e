"""Measurement matrices: construction, compression, and adaptive optimization."""

import csv
from dataclasses import dataclass

import numpy as np

from .kernels import PHI_DIVERGENCE_LIMIT
from .signal import complex_gaussian

__all__ = ["MeasurementMatrix", "PhiOptimizerState", "DivergenceError",
           "init_gaussian", "compress", "phi_update",
           "save_phi_csv", "load_phi_csv"]


class DivergenceError(RuntimeError):
    """The measurement-matrix recursion produced unbounded entries."""


@dataclass(frozen=True)
class MeasurementMatrix:
    """D x M linear map from the full space to the compressed domain."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2:
            raise ValueError("entries must be a 2-D matrix")
        if entries.shape[0] > entries.shape[1]:
            raise ValueError("reduced dimension D must not exceed M")
        if not np.isfinite(entries).all():
            raise ValueError("entries must be finite")

    @property
    def d(self):
        return self.entries.shape[0]

    @property
    def m(self):
        return self.entries.shape[1]


@dataclass(frozen=True)
class PhiOptimizerState:
    """Step size plus the per-node matrices evolving under phi_update."""

    eta: float
    phis: np.ndarray  # (n_nodes, D, M)

    def __post_init__(self):
        if self.eta < 0.0:
            raise ValueError("eta must be >= 0")
        phis = np.asarray(self.phis, dtype=np.complex128)
        if phis.ndim != 3:
            raise ValueError("phis must have shape (n_nodes, D, M)")
        object.__setattr__(self, "phis", phis)

    def matrix(self, k):
        return MeasurementMatrix(entries=self.phis[k])


def init_gaussian(d, m, rng, real_valued=False):
    """I.i.d. Gaussian measurement matrix with per-entry variance 1/D.

    The 1/D normalization keeps E||phi x||^2 close to ||x||^2 for
    unit-variance inputs.
    """
    if not 1 <= d <= m:
        raise ValueError(f"invalid dimensions: need 1 <= d <= m, got d={d}, m={m}")
    entries = complex_gaussian(rng, (d, m), 1.0 / d, real_valued)
    return MeasurementMatrix(entries=entries)


def compress(phi, x):
    """Compressed regressor phi @ x."""
    x = np.asarray(x)
    if x.shape[0] != phi.m:
        raise ValueError("input length does not match the matrix width")
    return phi.entries @ x


def phi_update(phi, x_bar, y, omega_re, eta):
    """One steepest-descent update of the measurement matrix.

    new = phi + eta * (conj(y) * x_bar omega_re^H
                       - x_bar x_bar^H phi omega_re omega_re^H)
    which is minus the conjugate-coordinate gradient of the instantaneous
    surrogate cost with the compressed regressor and filter output held fixed
    and the unknown parameter replaced by the reconstruction omega_re.
    Pure function: the input matrix is left untouched.
    """
    if eta < 0.0:
        raise ValueError("eta must be >= 0")
    x_bar = np.asarray(x_bar, dtype=np.complex128)
    omega_re = np.asarray(omega_re, dtype=np.complex128)
    if x_bar.shape[0] != phi.d or omega_re.shape[0] != phi.m:
        raise ValueError("dimension mismatch in phi_update")
    s = np.vdot(x_bar, phi.entries @ omega_re)
    increment = eta * (np.conj(y) - s) * np.outer(x_bar, np.conj(omega_re))
    entries = phi.entries + increment
    finite = np.isfinite(entries).all()
    if not finite or np.abs(entries).max() > PHI_DIVERGENCE_LIMIT:
        raise DivergenceError(
            "measurement-matrix update diverged; reduce the step size eta")
    return MeasurementMatrix(entries=entries)


def save_phi_csv(phi, path):
    """Dump matrix entries as (row, col, real, imag) CSV rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "real", "imag"])
        for r in range(phi.d):
            for c in range(phi.m):
                v = phi.entries[r, c]
                writer.writerow([r, c, repr(float(v.real)), repr(float(v.imag))])


def load_phi_csv(path):
    """Read a matrix written by save_phi_csv."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"row", "col", "real", "imag"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ValueError(f"{path}: expected columns {sorted(required)}")
        for rec in reader:
            rows.append((int(rec["row"]), int(rec["col"]),
                         float(rec["real"]), float(rec["imag"])))
    if not rows:
        raise ValueError(f"{path}: no matrix entries")
    d = max(r for r, _, _, _ in rows) + 1
    m = max(c for _, c, _, _ in rows) + 1
    entries = np.zeros((d, m), dtype=np.complex128)
    for r, c, re, im in rows:
        entries[r, c] = re + 1j * im
    return MeasurementMatrix(entries=entries)
