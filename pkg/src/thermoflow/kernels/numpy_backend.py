"""Pure-numpy reference implementations of the stencil and reduction kernels.

Dimension-generic via slicing; boundary ghosts realized with ``np.pad``.
This backend is always importable and is the fallback when numba is
disabled or unavailable.
"""

from __future__ import annotations

import numpy as np

from .modes import BC_DIRICHLET, BC_NEUMANN, MODE_EVEN, MODE_ODD, MODE_ONESIDED

NAME = "numpy"


def _axis_slice(nd: int, axis: int, sl: slice) -> tuple:
    out = [slice(None)] * nd
    out[axis] = sl
    return tuple(out)


def ddx(values: np.ndarray, axis: int, h: float, mode: int) -> np.ndarray:
    """First derivative along one axis: centered interior, `mode` at the ends."""
    nd = values.ndim
    out = np.empty_like(values)
    inner = _axis_slice(nd, axis, slice(1, -1))
    up = _axis_slice(nd, axis, slice(2, None))
    dn = _axis_slice(nd, axis, slice(None, -2))
    out[inner] = (values[up] - values[dn]) * (0.5 / h)

    lo = _axis_slice(nd, axis, slice(0, 1))
    hi = _axis_slice(nd, axis, slice(-1, None))
    if mode == MODE_EVEN:
        out[lo] = 0.0
        out[hi] = 0.0
    elif mode == MODE_ODD:
        second = _axis_slice(nd, axis, slice(1, 2))
        penult = _axis_slice(nd, axis, slice(-2, -1))
        out[lo] = (values[second] - values[lo]) / h
        out[hi] = (values[hi] - values[penult]) / h
    elif mode == MODE_ONESIDED:
        s1 = _axis_slice(nd, axis, slice(1, 2))
        s2 = _axis_slice(nd, axis, slice(2, 3))
        p1 = _axis_slice(nd, axis, slice(-2, -1))
        p2 = _axis_slice(nd, axis, slice(-3, -2))
        out[lo] = (-3.0 * values[lo] + 4.0 * values[s1] - values[s2]) * (0.5 / h)
        out[hi] = (3.0 * values[hi] - 4.0 * values[p1] + values[p2]) * (0.5 / h)
    else:
        raise ValueError(f"unknown ddx mode {mode}")
    return out


def _second_diff_axis(values: np.ndarray, axis: int, h: float, bc: int) -> np.ndarray:
    nd = values.ndim
    out = np.empty_like(values)
    inner = _axis_slice(nd, axis, slice(1, -1))
    up = _axis_slice(nd, axis, slice(2, None))
    dn = _axis_slice(nd, axis, slice(None, -2))
    ctr = _axis_slice(nd, axis, slice(1, -1))
    inv_h2 = 1.0 / (h * h)
    out[inner] = (values[up] - 2.0 * values[ctr] + values[dn]) * inv_h2

    lo = _axis_slice(nd, axis, slice(0, 1))
    hi = _axis_slice(nd, axis, slice(-1, None))
    if bc == BC_NEUMANN:
        second = _axis_slice(nd, axis, slice(1, 2))
        penult = _axis_slice(nd, axis, slice(-2, -1))
        out[lo] = 2.0 * (values[second] - values[lo]) * inv_h2
        out[hi] = 2.0 * (values[penult] - values[hi]) * inv_h2
    else:
        # Boundary rows are not part of the Dirichlet operator; caller zeroes them.
        out[lo] = 0.0
        out[hi] = 0.0
    return out


def laplacian(values: np.ndarray, spacings: tuple, bc: int) -> np.ndarray:
    """Sum of per-axis 3-point second differences.

    Dirichlet: neighbor values at boundary points are read as stored (zero
    for valid fields) and the output is zeroed on the whole boundary.
    Neumann: mirror ghosts on every face.
    """
    out = np.zeros_like(values)
    for axis, h in enumerate(spacings):
        out += _second_diff_axis(values, axis, h, bc)
    if bc == BC_DIRICHLET:
        for axis in range(values.ndim):
            out[_axis_slice(values.ndim, axis, slice(0, 1))] = 0.0
            out[_axis_slice(values.ndim, axis, slice(-1, None))] = 0.0
    return out


def second_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Pure second derivative along one axis with mirror (Neumann) ghosts."""
    return _second_diff_axis(values, axis, h, BC_NEUMANN)


def cross_diff(values: np.ndarray, axis_i: int, axis_j: int, h_i: float, h_j: float) -> np.ndarray:
    """Mixed second derivative with mirror ghosts along both axes."""
    pad = [(0, 0)] * values.ndim
    pad[axis_i] = (1, 1)
    pad[axis_j] = (1, 1)
    p = np.pad(values, pad, mode="reflect")
    nd = values.ndim

    def pick(di: int, dj: int) -> np.ndarray:
        sl = [slice(None)] * nd
        sl[axis_i] = slice(1 + di, p.shape[axis_i] - 1 + di)
        sl[axis_j] = slice(1 + dj, p.shape[axis_j] - 1 + dj)
        return p[tuple(sl)]

    return (pick(1, 1) - pick(1, -1) - pick(-1, 1) + pick(-1, -1)) * (0.25 / (h_i * h_j))


def weighted_sum(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(values.ravel(), weights.ravel()))


def weighted_dot(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot((a * b).ravel(), weights.ravel()))
