"""Exception types shared across the package."""


class ThermoflowError(Exception):
    """Base class for all errors raised by thermoflow."""


class InvalidInputError(ThermoflowError):
    """Malformed grid, field, or configuration values."""


class GridMismatchError(InvalidInputError):
    """Operands live on different grids or have inconsistent shapes."""


class SolverFailureError(ThermoflowError):
    """Linear solve did not reach the requested tolerance.

    Carries the final residual so callers can report how close it got.
    """

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (residual={residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


class PositivityError(ThermoflowError):
    """Temperature left the positive cone; reports the first offending point."""

    def __init__(self, message: str, index: tuple, value: float):
        super().__init__(f"{message} at grid index {index}: value {value:.6e}")
        self.index = index
        self.value = value


class TimeStepTooLargeError(ThermoflowError):
    """The current dt degenerates a semi-implicit update."""


class DivergenceError(ThermoflowError):
    """The trajectory blew up (e.g. log-temperature overflow)."""


class ConfigError(InvalidInputError):
    """Config file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CorruptSnapshotError(ThermoflowError):
    """Snapshot bytes or sidecar metadata fail their integrity checks."""
