"""Numba-compiled kernels: same contract as numpy_backend, loop bodies fused.

Compiled lazily on first call per signature and cached on disk, so the
warm-up cost is paid once per environment.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .modes import BC_DIRICHLET, BC_NEUMANN, MODE_EVEN, MODE_ODD, MODE_ONESIDED

NAME = "numba"


@njit(cache=True)
def _ddx_1d(f, h, mode):
    n = f.shape[0]
    out = np.empty_like(f)
    c = 0.5 / h
    for j in range(1, n - 1):
        out[j] = (f[j + 1] - f[j - 1]) * c
    if mode == 0:
        out[0] = 0.0
        out[n - 1] = 0.0
    elif mode == 1:
        out[0] = (f[1] - f[0]) / h
        out[n - 1] = (f[n - 1] - f[n - 2]) / h
    else:
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * c
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * c
    return out


@njit(cache=True)
def _edge_lo(f0, f1, f2, h, mode):
    if mode == 0:
        return 0.0
    if mode == 1:
        return (f1 - f0) / h
    return (-3.0 * f0 + 4.0 * f1 - f2) * (0.5 / h)


@njit(cache=True)
def _ddx_2d(f, axis, h, mode):
    n0, n1 = f.shape
    out = np.empty_like(f)
    c = 0.5 / h
    if axis == 0:
        for j1 in range(n1):
            for j in range(1, n0 - 1):
                out[j, j1] = (f[j + 1, j1] - f[j - 1, j1]) * c
            out[0, j1] = _edge_lo(f[0, j1], f[1, j1], f[2, j1], h, mode)
            out[n0 - 1, j1] = -_edge_lo(f[n0 - 1, j1], f[n0 - 2, j1], f[n0 - 3, j1], h, mode)
    else:
        for j0 in range(n0):
            for j in range(1, n1 - 1):
                out[j0, j] = (f[j0, j + 1] - f[j0, j - 1]) * c
            out[j0, 0] = _edge_lo(f[j0, 0], f[j0, 1], f[j0, 2], h, mode)
            out[j0, n1 - 1] = -_edge_lo(f[j0, n1 - 1], f[j0, n1 - 2], f[j0, n1 - 3], h, mode)
    return out


@njit(cache=True)
def _ddx_3d(f, axis, h, mode):
    n0, n1, n2 = f.shape
    out = np.empty_like(f)
    c = 0.5 / h
    if axis == 0:
        for j1 in range(n1):
            for j2 in range(n2):
                for j in range(1, n0 - 1):
                    out[j, j1, j2] = (f[j + 1, j1, j2] - f[j - 1, j1, j2]) * c
                out[0, j1, j2] = _edge_lo(f[0, j1, j2], f[1, j1, j2], f[2, j1, j2], h, mode)
                out[n0 - 1, j1, j2] = -_edge_lo(
                    f[n0 - 1, j1, j2], f[n0 - 2, j1, j2], f[n0 - 3, j1, j2], h, mode
                )
    elif axis == 1:
        for j0 in range(n0):
            for j2 in range(n2):
                for j in range(1, n1 - 1):
                    out[j0, j, j2] = (f[j0, j + 1, j2] - f[j0, j - 1, j2]) * c
                out[j0, 0, j2] = _edge_lo(f[j0, 0, j2], f[j0, 1, j2], f[j0, 2, j2], h, mode)
                out[j0, n1 - 1, j2] = -_edge_lo(
                    f[j0, n1 - 1, j2], f[j0, n1 - 2, j2], f[j0, n1 - 3, j2], h, mode
                )
    else:
        for j0 in range(n0):
            for j1 in range(n1):
                for j in range(1, n2 - 1):
                    out[j0, j1, j] = (f[j0, j1, j + 1] - f[j0, j1, j - 1]) * c
                out[j0, j1, 0] = _edge_lo(f[j0, j1, 0], f[j0, j1, 1], f[j0, j1, 2], h, mode)
                out[j0, j1, n2 - 1] = -_edge_lo(
                    f[j0, j1, n2 - 1], f[j0, j1, n2 - 2], f[j0, j1, n2 - 3], h, mode
                )
    return out


@njit(cache=True)
def _lap_1d(f, ih0, bc):
    n = f.shape[0]
    out = np.zeros_like(f)
    for j in range(1, n - 1):
        out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) * ih0
    if bc == 1:
        out[0] = 2.0 * (f[1] - f[0]) * ih0
        out[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * ih0
    return out


@njit(cache=True)
def _lap_2d(f, ih0, ih1, bc):
    n0, n1 = f.shape
    out = np.zeros_like(f)
    if bc == 0:
        for j0 in range(1, n0 - 1):
            for j1 in range(1, n1 - 1):
                out[j0, j1] = (f[j0 + 1, j1] - 2.0 * f[j0, j1] + f[j0 - 1, j1]) * ih0 + (
                    f[j0, j1 + 1] - 2.0 * f[j0, j1] + f[j0, j1 - 1]
                ) * ih1
    else:
        for j0 in range(n0):
            j0m = j0 - 1 if j0 > 0 else 1
            j0p = j0 + 1 if j0 < n0 - 1 else n0 - 2
            for j1 in range(n1):
                j1m = j1 - 1 if j1 > 0 else 1
                j1p = j1 + 1 if j1 < n1 - 1 else n1 - 2
                out[j0, j1] = (f[j0p, j1] - 2.0 * f[j0, j1] + f[j0m, j1]) * ih0 + (
                    f[j0, j1p] - 2.0 * f[j0, j1] + f[j0, j1m]
                ) * ih1
    return out


@njit(cache=True)
def _lap_3d(f, ih0, ih1, ih2, bc):
    n0, n1, n2 = f.shape
    out = np.zeros_like(f)
    if bc == 0:
        for j0 in range(1, n0 - 1):
            for j1 in range(1, n1 - 1):
                for j2 in range(1, n2 - 1):
                    out[j0, j1, j2] = (
                        (f[j0 + 1, j1, j2] - 2.0 * f[j0, j1, j2] + f[j0 - 1, j1, j2]) * ih0
                        + (f[j0, j1 + 1, j2] - 2.0 * f[j0, j1, j2] + f[j0, j1 - 1, j2]) * ih1
                        + (f[j0, j1, j2 + 1] - 2.0 * f[j0, j1, j2] + f[j0, j1, j2 - 1]) * ih2
                    )
    else:
        for j0 in range(n0):
            j0m = j0 - 1 if j0 > 0 else 1
            j0p = j0 + 1 if j0 < n0 - 1 else n0 - 2
            for j1 in range(n1):
                j1m = j1 - 1 if j1 > 0 else 1
                j1p = j1 + 1 if j1 < n1 - 1 else n1 - 2
                for j2 in range(n2):
                    j2m = j2 - 1 if j2 > 0 else 1
                    j2p = j2 + 1 if j2 < n2 - 1 else n2 - 2
                    out[j0, j1, j2] = (
                        (f[j0p, j1, j2] - 2.0 * f[j0, j1, j2] + f[j0m, j1, j2]) * ih0
                        + (f[j0, j1p, j2] - 2.0 * f[j0, j1, j2] + f[j0, j1m, j2]) * ih1
                        + (f[j0, j1, j2p] - 2.0 * f[j0, j1, j2] + f[j0, j1, j2m]) * ih2
                    )
    return out


@njit(cache=True)
def _d2_axis_1d(f, ih):
    return _lap_1d(f, ih, 1)


@njit(cache=True)
def _d2_axis_2d(f, axis, ih):
    n0, n1 = f.shape
    out = np.empty_like(f)
    if axis == 0:
        for j0 in range(n0):
            j0m = j0 - 1 if j0 > 0 else 1
            j0p = j0 + 1 if j0 < n0 - 1 else n0 - 2
            for j1 in range(n1):
                out[j0, j1] = (f[j0p, j1] - 2.0 * f[j0, j1] + f[j0m, j1]) * ih
    else:
        for j0 in range(n0):
            for j1 in range(n1):
                j1m = j1 - 1 if j1 > 0 else 1
                j1p = j1 + 1 if j1 < n1 - 1 else n1 - 2
                out[j0, j1] = (f[j0, j1p] - 2.0 * f[j0, j1] + f[j0, j1m]) * ih
    return out


@njit(cache=True)
def _d2_axis_3d(f, axis, ih):
    n0, n1, n2 = f.shape
    out = np.empty_like(f)
    for j0 in range(n0):
        j0m = j0 - 1 if j0 > 0 else 1
        j0p = j0 + 1 if j0 < n0 - 1 else n0 - 2
        for j1 in range(n1):
            j1m = j1 - 1 if j1 > 0 else 1
            j1p = j1 + 1 if j1 < n1 - 1 else n1 - 2
            for j2 in range(n2):
                j2m = j2 - 1 if j2 > 0 else 1
                j2p = j2 + 1 if j2 < n2 - 1 else n2 - 2
                if axis == 0:
                    out[j0, j1, j2] = (f[j0p, j1, j2] - 2.0 * f[j0, j1, j2] + f[j0m, j1, j2]) * ih
                elif axis == 1:
                    out[j0, j1, j2] = (f[j0, j1p, j2] - 2.0 * f[j0, j1, j2] + f[j0, j1m, j2]) * ih
                else:
                    out[j0, j1, j2] = (f[j0, j1, j2p] - 2.0 * f[j0, j1, j2] + f[j0, j1, j2m]) * ih
    return out


@njit(cache=True)
def _cross_2d(f, c):
    n0, n1 = f.shape
    out = np.empty_like(f)
    for j0 in range(n0):
        j0m = j0 - 1 if j0 > 0 else 1
        j0p = j0 + 1 if j0 < n0 - 1 else n0 - 2
        for j1 in range(n1):
            j1m = j1 - 1 if j1 > 0 else 1
            j1p = j1 + 1 if j1 < n1 - 1 else n1 - 2
            out[j0, j1] = (f[j0p, j1p] - f[j0p, j1m] - f[j0m, j1p] + f[j0m, j1m]) * c
    return out


@njit(cache=True)
def _cross_3d(f, axis_i, axis_j, c):
    n0, n1, n2 = f.shape
    out = np.empty_like(f)
    for j0 in range(n0):
        j0m = j0 - 1 if j0 > 0 else 1
        j0p = j0 + 1 if j0 < n0 - 1 else n0 - 2
        for j1 in range(n1):
            j1m = j1 - 1 if j1 > 0 else 1
            j1p = j1 + 1 if j1 < n1 - 1 else n1 - 2
            for j2 in range(n2):
                j2m = j2 - 1 if j2 > 0 else 1
                j2p = j2 + 1 if j2 < n2 - 1 else n2 - 2
                if axis_i == 0 and axis_j == 1:
                    out[j0, j1, j2] = (
                        f[j0p, j1p, j2] - f[j0p, j1m, j2] - f[j0m, j1p, j2] + f[j0m, j1m, j2]
                    ) * c
                elif axis_i == 0 and axis_j == 2:
                    out[j0, j1, j2] = (
                        f[j0p, j1, j2p] - f[j0p, j1, j2m] - f[j0m, j1, j2p] + f[j0m, j1, j2m]
                    ) * c
                else:
                    out[j0, j1, j2] = (
                        f[j0, j1p, j2p] - f[j0, j1p, j2m] - f[j0, j1m, j2p] + f[j0, j1m, j2m]
                    ) * c
    return out


@njit(cache=True)
def _wsum(f, w):
    acc = 0.0
    for j in range(f.shape[0]):
        acc += f[j] * w[j]
    return acc


@njit(cache=True)
def _wdot(a, b, w):
    acc = 0.0
    for j in range(a.shape[0]):
        acc += a[j] * b[j] * w[j]
    return acc


def _contig(values: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(values)


def ddx(values: np.ndarray, axis: int, h: float, mode: int) -> np.ndarray:
    if mode not in (MODE_EVEN, MODE_ODD, MODE_ONESIDED):
        raise ValueError(f"unknown ddx mode {mode}")
    f = _contig(values)
    if f.ndim == 1:
        return _ddx_1d(f, h, mode)
    if f.ndim == 2:
        return _ddx_2d(f, axis, h, mode)
    return _ddx_3d(f, axis, h, mode)


def laplacian(values: np.ndarray, spacings: tuple, bc: int) -> np.ndarray:
    f = _contig(values)
    ih = tuple(1.0 / (h * h) for h in spacings)
    if f.ndim == 1:
        return _lap_1d(f, ih[0], bc)
    if f.ndim == 2:
        return _lap_2d(f, ih[0], ih[1], bc)
    return _lap_3d(f, ih[0], ih[1], ih[2], bc)


def second_diff(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    f = _contig(values)
    ih = 1.0 / (h * h)
    if f.ndim == 1:
        return _d2_axis_1d(f, ih)
    if f.ndim == 2:
        return _d2_axis_2d(f, axis, ih)
    return _d2_axis_3d(f, axis, ih)


def cross_diff(values: np.ndarray, axis_i: int, axis_j: int, h_i: float, h_j: float) -> np.ndarray:
    f = _contig(values)
    c = 0.25 / (h_i * h_j)
    if f.ndim == 2:
        return _cross_2d(f, c)
    a, b = sorted((axis_i, axis_j))
    return _cross_3d(f, a, b, c)


def weighted_sum(values: np.ndarray, weights: np.ndarray) -> float:
    return float(_wsum(_contig(values).ravel(), _contig(weights).ravel()))


def weighted_dot(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
    return float(_wdot(_contig(a).ravel(), _contig(b).ravel(), _contig(weights).ravel()))
