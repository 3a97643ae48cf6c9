"""Tensor grids on axis-aligned boxes and the fields that live on them.

Grids are collocated (boundary points included). Fields carry a boundary
tag that fixes the ghost convention every discrete operator uses:
``DIRICHLET_ZERO`` extends oddly (value pinned to zero on the boundary),
``NEUMANN_ZERO`` extends by mirror reflection (zero normal derivative).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import GridMismatchError, InvalidInputError


class BoundaryCondition(enum.Enum):
    DIRICHLET_ZERO = "dirichlet_zero"
    NEUMANN_ZERO = "neumann_zero"


DIRICHLET = BoundaryCondition.DIRICHLET_ZERO
NEUMANN = BoundaryCondition.NEUMANN_ZERO


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid on a box, endpoints included along every axis."""

    n_points: tuple[int, ...]
    lengths: tuple[float, ...]

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n_points))
        ell = tuple(float(v) for v in np.atleast_1d(self.lengths))
        object.__setattr__(self, "n_points", n)
        object.__setattr__(self, "lengths", ell)
        if not 1 <= len(n) <= 3:
            raise InvalidInputError(f"grid dimension must be 1, 2, or 3, got {len(n)}")
        if len(ell) != len(n):
            raise InvalidInputError("n_points and lengths must have the same dimension")
        if any(v < 3 for v in n):
            raise InvalidInputError(f"need at least 3 points per axis, got {n}")
        if any(not np.isfinite(v) or v <= 0 for v in ell):
            raise InvalidInputError(f"box lengths must be positive and finite, got {ell}")

    @property
    def dim(self) -> int:
        return len(self.n_points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n_points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / (n - 1) for n, L in zip(self.n_points, self.lengths))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def axis_coords(self, axis: int) -> np.ndarray:
        """Grid coordinates along one axis, 0 .. L inclusive."""
        return np.linspace(0.0, self.lengths[axis], self.n_points[axis])

    def meshgrid(self) -> tuple[np.ndarray, ...]:
        return np.meshgrid(*(self.axis_coords(a) for a in range(self.dim)), indexing="ij")


@lru_cache(maxsize=32)
def quadrature_weights(grid: Grid) -> np.ndarray:
    """Trapezoidal weights as a full array: product of per-axis weights.

    Interior weight is the cell volume, halved once per boundary face a
    point sits on. This is the pairing that makes the centered-difference
    adjointness identities exact.
    """
    w = np.ones((), dtype=np.float64)
    for n, h in zip(grid.n_points, grid.spacing):
        axis_w = np.full(n, h)
        axis_w[0] *= 0.5
        axis_w[-1] *= 0.5
        w = np.multiply.outer(w, axis_w)
    return w


def _boundary_mask(shape: tuple[int, ...]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for axis in range(len(shape)):
        sl = [slice(None)] * len(shape)
        sl[axis] = 0
        mask[tuple(sl)] = True
        sl[axis] = -1
        mask[tuple(sl)] = True
    return mask


@lru_cache(maxsize=32)
def boundary_mask(grid: Grid) -> np.ndarray:
    return _boundary_mask(grid.shape)


@dataclass
class ScalarField:
    """Grid function plus the boundary tag governing its ghost extension."""

    grid: Grid
    values: np.ndarray
    bc: BoundaryCondition

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise GridMismatchError(
                f"field shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.bc)

    def require_finite(self, label: str = "field") -> None:
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError(f"{label} contains NaN or Inf")

    def require_boundary_zero(self, label: str = "field") -> None:
        bad = self.values[boundary_mask(self.grid)]
        if np.any(bad != 0.0):
            raise InvalidInputError(f"{label} tagged DirichletZero has nonzero boundary values")

    @classmethod
    def zeros(cls, grid: Grid, bc: BoundaryCondition) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), bc)

    @classmethod
    def constant(cls, grid: Grid, value: float, bc: BoundaryCondition = NEUMANN) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)), bc)


@dataclass
class VectorField:
    """One ScalarField per spatial axis. State vectors (displacement,
    velocity) are all-Dirichlet; operator outputs may carry other tags."""

    components: tuple[ScalarField, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.components = tuple(self.components)
        if not self.components:
            raise InvalidInputError("vector field needs at least one component")
        g = self.components[0].grid
        if any(c.grid != g for c in self.components):
            raise GridMismatchError("vector components live on different grids")
        if len(self.components) != g.dim:
            raise GridMismatchError(
                f"expected {g.dim} components on a {g.dim}D grid, got {len(self.components)}"
            )

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def copy(self) -> "VectorField":
        return VectorField(tuple(c.copy() for c in self.components))

    def require_finite(self, label: str = "vector field") -> None:
        for i, c in enumerate(self.components):
            c.require_finite(f"{label}[{i}]")

    def require_dirichlet(self, label: str = "vector field") -> None:
        for i, c in enumerate(self.components):
            if c.bc is not DIRICHLET:
                raise InvalidInputError(f"{label}[{i}] must be tagged DirichletZero")
            c.require_boundary_zero(f"{label}[{i}]")

    @classmethod
    def zeros(cls, grid: Grid, bc: BoundaryCondition = DIRICHLET) -> "VectorField":
        return cls(tuple(ScalarField.zeros(grid, bc) for _ in range(grid.dim)))
