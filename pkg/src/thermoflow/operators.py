"""Discrete vector calculus on collocated tensor grids.

Conventions (all centered, second order in the interior):

* gradient of a NeumannZero field uses mirror ghosts, so the normal
  component is exactly zero on the boundary; gradient of a DirichletZero
  field uses one-sided second-order differences at the walls.
* divergence differentiates each component along its own axis with the
  ghost extension implied by the component tag (odd for DirichletZero,
  mirror for NeumannZero). Together with trapezoidal quadrature this makes
  integrate(grad(f) . w) == -integrate(f * div(w)) hold to machine
  precision for NeumannZero f and DirichletZero w.
* laplacian is the (2*dim+1)-point stencil: zero ghosts for DirichletZero
  (output zero on the boundary), mirror ghosts for NeumannZero. It is
  symmetric and negative semidefinite under the quadrature inner product.

Output tags follow the symmetry of the result: differentiating flips
DirichletZero <-> NeumannZero along the differencing axis, which is exact
for the sine/cosine families these grids are built around.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import GridMismatchError, InvalidInputError
from .grid import DIRICHLET, NEUMANN, BoundaryCondition, Grid, ScalarField, VectorField, quadrature_weights


def _bc_flag(bc: BoundaryCondition) -> int:
    return kernels.BC_DIRICHLET if bc is DIRICHLET else kernels.BC_NEUMANN


def _grad_mode(bc: BoundaryCondition) -> int:
    return kernels.MODE_ONESIDED if bc is DIRICHLET else kernels.MODE_EVEN


def _div_mode(bc: BoundaryCondition) -> int:
    return kernels.MODE_ODD if bc is DIRICHLET else kernels.MODE_EVEN


def _flip(bc: BoundaryCondition) -> BoundaryCondition:
    return NEUMANN if bc is DIRICHLET else DIRICHLET


def gradient(f: ScalarField) -> VectorField:
    """Componentwise first derivatives of a scalar field."""
    f.require_finite("gradient input")
    h = f.grid.spacing
    mode = _grad_mode(f.bc)
    out_bc = _flip(f.bc)
    comps = tuple(
        ScalarField(f.grid, kernels.ddx(f.values, axis, h[axis], mode), out_bc)
        for axis in range(f.grid.dim)
    )
    return VectorField(comps)


def divergence(w: VectorField) -> ScalarField:
    """Sum of per-axis derivatives of the components."""
    w.require_finite("divergence input")
    grid = w.grid
    h = grid.spacing
    out = np.zeros(grid.shape)
    out_bc = _flip(w.components[0].bc)
    for axis, comp in enumerate(w.components):
        out += kernels.ddx(comp.values, axis, h[axis], _div_mode(comp.bc))
    return ScalarField(grid, out, out_bc)


def laplacian(f: ScalarField) -> ScalarField:
    """3/5/7-point Laplacian with the ghost convention of the field's tag."""
    f.require_finite("laplacian input")
    out = kernels.laplacian(f.values, f.grid.spacing, _bc_flag(f.bc))
    return ScalarField(f.grid, out, f.bc)


def integrate(f: ScalarField) -> float:
    """Trapezoidal quadrature over the box."""
    f.require_finite("integrate input")
    return kernels.weighted_sum(f.values, quadrature_weights(f.grid))


def inner(f: ScalarField, g: ScalarField) -> float:
    """Quadrature inner product of two scalar fields on the same grid."""
    if f.grid != g.grid:
        raise GridMismatchError("inner product operands live on different grids")
    f.require_finite("inner operand")
    g.require_finite("inner operand")
    return kernels.weighted_dot(f.values, g.values, quadrature_weights(f.grid))


def grad_squared(f: ScalarField) -> np.ndarray:
    """Pointwise |grad f|^2, the workhorse of the entropy functionals."""
    f.require_finite("grad_squared input")
    h = f.grid.spacing
    mode = _grad_mode(f.bc)
    out = np.zeros(f.grid.shape)
    for axis in range(f.grid.dim):
        d = kernels.ddx(f.values, axis, h[axis], mode)
        out += d * d
    return out


def hessian_frobenius_sq(f: ScalarField) -> np.ndarray:
    """Pointwise squared Frobenius norm of the mirror-ghost Hessian.

    Only meaningful for NeumannZero fields; off-diagonal entries are
    counted twice by symmetry.
    """
    if f.bc is not NEUMANN:
        raise InvalidInputError("hessian_frobenius_sq expects a NeumannZero field")
    f.require_finite("hessian input")
    grid = f.grid
    h = grid.spacing
    out = np.zeros(grid.shape)
    for axis in range(grid.dim):
        d = kernels.second_diff(f.values, axis, h[axis])
        out += d * d
    for i in range(grid.dim):
        for j in range(i + 1, grid.dim):
            d = kernels.cross_diff(f.values, i, j, h[i], h[j])
            out += 2.0 * d * d
    return out


def as_grid(grid: Grid, values: np.ndarray, bc: BoundaryCondition) -> ScalarField:
    """Small helper used where raw arrays meet the typed surface."""
    return ScalarField(grid, values, bc)
