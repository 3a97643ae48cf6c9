"""Screened-Laplacian solves: (I - c*Lap) x = rhs for both boundary types.

Two interchangeable methods behind one SolverSpec:

* ``cg``       - matrix-free conjugate gradients in the quadrature inner
  product (the operator is symmetric positive definite there). Default.
* ``spectral`` - exact diagonalization: the 3-point stencils are
  diagonalized by the type-I sine transform (Dirichlet, interior points)
  and the type-I cosine transform (Neumann, all points), so one forward
  transform, a pointwise divide, and one inverse transform solve the
  system to machine precision. Time stepping uses this path: the operator
  is fixed for a whole run, and iterating CG 2e5 times would dominate the
  budget.

Dirichlet solves treat boundary entries of the right-hand side as
irrelevant (the unknown is pinned to zero there).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from . import kernels
from .errors import InvalidInputError, SolverFailureError
from .grid import DIRICHLET, NEUMANN, BoundaryCondition, Grid, ScalarField, quadrature_weights


@dataclass(frozen=True)
class SolverSpec:
    """How hard to try: relative tolerance, iteration budget, method."""

    rel_tolerance: float = 1e-10
    max_iterations: int | None = None
    method: str = "cg"

    def __post_init__(self):
        if not 0.0 < self.rel_tolerance <= 1e-4:
            raise InvalidInputError(
                f"rel_tolerance must be in (0, 1e-4], got {self.rel_tolerance}"
            )
        if self.max_iterations is not None and self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be positive")
        if self.method not in ("cg", "spectral"):
            raise InvalidInputError(f"unknown solver method {self.method!r}")

    def iteration_budget(self, grid: Grid) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        n_total = float(np.prod(grid.n_points))
        return int(math.ceil(10.0 * n_total ** (1.0 / grid.dim)))


def dirichlet_eigenvalues(n: int, h: float) -> np.ndarray:
    """Eigenvalues of -Lap for the interior sine modes k = 1 .. n-2."""
    k = np.arange(1, n - 1)
    return (2.0 / (h * h)) * (1.0 - np.cos(k * np.pi / (n - 1)))


def neumann_eigenvalues(n: int, h: float) -> np.ndarray:
    """Eigenvalues of -Lap for the cosine modes k = 0 .. n-1."""
    k = np.arange(n)
    return (2.0 / (h * h)) * (1.0 - np.cos(k * np.pi / (n - 1)))


@lru_cache(maxsize=64)
def _eig_sum(grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    axes = []
    for n, h in zip(grid.n_points, grid.spacing):
        if bc is DIRICHLET:
            axes.append(dirichlet_eigenvalues(n, h))
        else:
            axes.append(neumann_eigenvalues(n, h))
    total = axes[0]
    for lam in axes[1:]:
        total = np.add.outer(total, lam)
    return total


def _interior(values: np.ndarray) -> np.ndarray:
    return values[tuple(slice(1, -1) for _ in range(values.ndim))]


def spectral_solve(values: np.ndarray, grid: Grid, bc: BoundaryCondition, coeff: float) -> np.ndarray:
    """Exact solve of (I - coeff*Lap) x = values via DST-I / DCT-I."""
    lam = _eig_sum(grid, bc)
    if bc is DIRICHLET:
        out = np.zeros(grid.shape)
        rhs_hat = scipy.fft.dstn(_interior(values), type=1)
        _interior(out)[...] = scipy.fft.idstn(rhs_hat / (1.0 + coeff * lam), type=1)
        return out
    rhs_hat = scipy.fft.dctn(values, type=1)
    return scipy.fft.idctn(rhs_hat / (1.0 + coeff * lam), type=1)


def apply_shifted(values: np.ndarray, grid: Grid, bc: BoundaryCondition, coeff: float) -> np.ndarray:
    """(I - coeff*Lap) applied matrix-free."""
    flag = kernels.BC_DIRICHLET if bc is DIRICHLET else kernels.BC_NEUMANN
    return values - coeff * kernels.laplacian(values, grid.spacing, flag)


def _zero_boundary(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    for axis in range(out.ndim):
        sl = [slice(None)] * out.ndim
        sl[axis] = 0
        out[tuple(sl)] = 0.0
        sl[axis] = -1
        out[tuple(sl)] = 0.0
    return out


def cg_solve(
    rhs: np.ndarray,
    grid: Grid,
    bc: BoundaryCondition,
    coeff: float,
    spec: SolverSpec,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, int, float]:
    """Conjugate gradients on (I - coeff*Lap) in the quadrature inner product.

    Returns (solution, iterations, relative residual); raises
    SolverFailureError if the budget is exhausted first.
    """
    w = quadrature_weights(grid)
    b = _zero_boundary(rhs) if bc is DIRICHLET else rhs
    if x0 is None:
        x = np.zeros_like(b)
    else:
        x = _zero_boundary(x0) if bc is DIRICHLET else x0.copy()
    r = b - apply_shifted(x, grid, bc, coeff)
    b_norm = math.sqrt(kernels.weighted_dot(b, b, w))
    if b_norm == 0.0:
        return np.zeros_like(b), 0, 0.0
    rs = kernels.weighted_dot(r, r, w)
    tol_abs = spec.rel_tolerance * b_norm
    budget = spec.iteration_budget(grid)
    p = r.copy()
    it = 0
    while math.sqrt(rs) > tol_abs:
        if it >= budget:
            raise SolverFailureError(
                "conjugate gradient did not converge", math.sqrt(rs) / b_norm, it
            )
        ap = apply_shifted(p, grid, bc, coeff)
        alpha = rs / kernels.weighted_dot(p, ap, w)
        x += alpha * p
        r -= alpha * ap
        rs_new = kernels.weighted_dot(r, r, w)
        p = r + (rs_new / rs) * p
        rs = rs_new
        it += 1
    return x, it, math.sqrt(rs) / b_norm


def solve_screened(
    rhs: np.ndarray,
    grid: Grid,
    bc: BoundaryCondition,
    coeff: float,
    spec: SolverSpec,
    x0: np.ndarray | None = None,
) -> np.ndarray:
    """Array-level entry point used by the time steppers."""
    if coeff < 0:
        raise InvalidInputError(f"screening coefficient must be >= 0, got {coeff}")
    if coeff == 0.0:
        return _zero_boundary(rhs) if bc is DIRICHLET else rhs.copy()
    if spec.method == "spectral":
        return spectral_solve(rhs, grid, bc, coeff)
    x, _, _ = cg_solve(rhs, grid, bc, coeff, spec, x0=x0)
    return x


def solve_shifted_dirichlet(rhs: ScalarField, shift: float, spec: SolverSpec = SolverSpec()) -> ScalarField:
    """Solve (I - shift*Lap_D) x = rhs with x pinned to zero on the boundary."""
    rhs.require_finite("solve_shifted_dirichlet rhs")
    x = solve_screened(rhs.values, rhs.grid, DIRICHLET, shift, spec)
    return ScalarField(rhs.grid, x, DIRICHLET)


def solve_implicit_heat(rhs: ScalarField, dt_coeff: float, spec: SolverSpec = SolverSpec()) -> ScalarField:
    """Solve (I - dt_coeff*Lap_N) x = rhs; preserves the mean of rhs."""
    rhs.require_finite("solve_implicit_heat rhs")
    x = solve_screened(rhs.values, rhs.grid, NEUMANN, dt_coeff, spec)
    return ScalarField(rhs.grid, x, NEUMANN)
