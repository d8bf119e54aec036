"""Numba acceleration layer.

Hot numeric kernels (the exact transport solver and the all-pairs BFS)
are written as plain Python functions restricted to numba's nopython
subset.  At import time each kernel is compiled with ``@njit`` unless

* numba is not importable, or
* the environment variable ``GEMINI_NO_NUMBA`` is set to a non-empty
  value other than ``0``,

in which case the uncompiled Python function is used.  Both paths run
the very same statements in the same order, so results are bit-identical;
``geminiclust bench --what impl`` compares their wall time.
"""

from __future__ import annotations

import os

NUMBA_ENV_FLAG = "GEMINI_NO_NUMBA"


def _numba_disabled_by_env() -> bool:
    value = os.environ.get(NUMBA_ENV_FLAG, "")
    return value not in ("", "0")


try:  # pragma: no cover - exercised implicitly on import
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _numba_disabled_by_env()


def active_impl() -> str:
    """Name of the implementation the kernels dispatch to."""
    return "numba" if USE_NUMBA else "numpy"


def jit_kernel(py_func):
    """Compile ``py_func`` with numba when enabled, else return it as is.

    The original Python function stays reachable as ``.py_func`` on the
    returned object either way, so benchmarks can time both variants.
    """
    if USE_NUMBA:
        return _njit(cache=True)(py_func)
    py_func.py_func = py_func
    return py_func
