"""thermoflow: a finite-difference lab for a coupled thermoelastic
wave/heat system, with structure-preserving integrators and a
verification harness for its balance laws and inequalities."""

__version__ = "0.1.0"

from .diagnostics import DiagnosticsRecord
from .dynamics import HeatForm, SimConfig, State, project_galerkin, run, step_coupled
from .elliptic import SolverSpec
from .grid import DIRICHLET, NEUMANN, BoundaryCondition, Grid, ScalarField, VectorField

__all__ = [
    "BoundaryCondition",
    "DIRICHLET",
    "DiagnosticsRecord",
    "Grid",
    "HeatForm",
    "NEUMANN",
    "ScalarField",
    "SimConfig",
    "SolverSpec",
    "State",
    "VectorField",
    "project_galerkin",
    "run",
    "step_coupled",
    "__version__",
]
