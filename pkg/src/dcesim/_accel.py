"""Kernel backend selection.

The hot numeric loops in :mod:`dcesim.kernels` are compiled with numba when it
is available.  Set ``DCESIM_NUMBA=0`` (or ``false``/``off``/``no``) to force
the pure-numpy interpretation of the same functions; this is much slower on
large experiments but useful for debugging and as a portability fallback.
``dcesim.kernels.BACKEND`` reports which path is active.
"""

import os
import warnings

_FALSE_VALUES = ("0", "false", "off", "no")
_TRUE_VALUES = ("1", "true", "on", "yes")


def numba_requested() -> bool:
    """Read the DCESIM_NUMBA env flag (default: use numba when importable)."""
    flag = os.environ.get("DCESIM_NUMBA", "").strip().lower()
    return flag not in _FALSE_VALUES


if numba_requested():
    try:
        from numba import njit as _njit

        def jit_kernel(func):
            return _njit(cache=True, nogil=True)(func)

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - sandbox has numba preinstalled
        flag = os.environ.get("DCESIM_NUMBA", "").strip().lower()
        if flag in _TRUE_VALUES:
            warnings.warn("DCESIM_NUMBA=1 but numba is not importable; "
                          "falling back to pure numpy kernels")

        def jit_kernel(func):
            return func

        BACKEND = "numpy"
else:
    def jit_kernel(func):
        return func

    BACKEND = "numpy"
