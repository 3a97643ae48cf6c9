"""Stencil and reduction kernels with selectable backend.

The numba backend is used when importable unless the environment variable
``THERMOFLOW_NUMBA`` is set to ``0`` (or ``false``), in which case the
pure-numpy implementation takes over. Both expose the identical function
surface; ``benchmarks/bench_kernels.py`` compares them.
"""

import os

from .modes import (
    BC_DIRICHLET,
    BC_NEUMANN,
    MODE_EVEN,
    MODE_ODD,
    MODE_ONESIDED,
)
from . import numpy_backend

_WANT_NUMBA = os.environ.get("THERMOFLOW_NUMBA", "1").strip().lower() not in ("0", "false", "no")

if _WANT_NUMBA:
    try:
        from . import numba_backend as _active

        HAS_NUMBA = True
    except ImportError:
        _active = numpy_backend
        HAS_NUMBA = False
else:
    _active = numpy_backend
    HAS_NUMBA = False

ACTIVE_BACKEND = _active.NAME

ddx = _active.ddx
laplacian = _active.laplacian
second_diff = _active.second_diff
cross_diff = _active.cross_diff
weighted_sum = _active.weighted_sum
weighted_dot = _active.weighted_dot


def get_backend(name: str):
    """Fetch a backend module by name ('numpy' or 'numba'), for benchmarks/tests."""
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    raise ValueError(f"unknown backend {name!r}")


__all__ = [
    "ACTIVE_BACKEND",
    "BC_DIRICHLET",
    "BC_NEUMANN",
    "HAS_NUMBA",
    "MODE_EVEN",
    "MODE_ODD",
    "MODE_ONESIDED",
    "cross_diff",
    "ddx",
    "get_backend",
    "laplacian",
    "second_diff",
    "weighted_dot",
    "weighted_sum",
]
