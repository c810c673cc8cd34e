"""Sparse recovery of compressed estimators via orthogonal matching pursuit."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .compression import MeasurementMatrix

__all__ = ["OmpConfig", "omp_reconstruct"]


@dataclass(frozen=True)
class OmpConfig:
    """Stopping rule for OMP: target support size plus a residual early-out."""

    max_support: int
    residual_tol: float = 1e-9

    def __post_init__(self):
        if self.max_support < 0:
            raise ValueError("max_support must be >= 0")
        if self.residual_tol < 0.0:
            raise ValueError("residual_tol must be >= 0")


def omp_reconstruct(phi, y, config):
    """Greedy sparse reconstruction of y against the columns of phi.

    Each step selects the column with the largest norm-weighted correlation
    |phi_j^H r| / ||phi_j|| against the residual (smallest index on ties),
    refits y on all selected columns by QR least squares, and updates the
    residual.  Stops at config.max_support columns or once the residual norm
    drops to config.residual_tol.  Returns a length-M vector that is zero off
    the selected support.
    """
    if isinstance(phi, MeasurementMatrix):
        entries = phi.entries
    else:
        entries = np.asarray(phi, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if y.shape[0] != entries.shape[0]:
        raise ValueError("input length does not match the matrix height")
    if config.max_support > entries.shape[0]:
        raise ValueError("max_support must not exceed the reduced dimension D")
    coeffs, _support, _stalled = kernels.omp_core(
        np.ascontiguousarray(entries), y, config.max_support,
        config.residual_tol, kernels.OMP_RANK_RTOL)
    return coeffs
