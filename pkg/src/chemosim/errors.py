"""Exception types raised across the package."""


class ChemosimError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(ChemosimError, ValueError):
    """A model or solver parameter is outside its admissible range."""


class OutOfRangeError(ChemosimError, ValueError):
    """A coordinate or exponent argument lies outside the valid interval."""


class TruncationError(ChemosimError, ValueError):
    """Requested profile does not fit on the truncated domain."""


class GridMismatchError(ChemosimError, ValueError):
    """Two fields that must share a grid do not."""


class PositivityError(ChemosimError, RuntimeError):
    """An explicit update produced a negative cell value (CFL violated)."""

    def __init__(self, cell: int, value: float, dt: float):
        self.cell = cell
        self.value = value
        self.dt = dt
        super().__init__(
            f"positivity violated in cell {cell}: value {value:.3e} after dt={dt:.3e}"
        )


class NumericalFailureError(ChemosimError, RuntimeError):
    """A non-finite value appeared during time integration."""

    def __init__(self, t_last: float, detail: str = ""):
        self.t_last = t_last
        super().__init__(f"non-finite value at t={t_last:.6g} {detail}".rstrip())


class NoZeroCrossingError(ChemosimError, RuntimeError):
    """Shooting integration found no sign change before the search bound."""


class MissingConstantError(ChemosimError, ValueError):
    """A derived quantity was requested before its prerequisite estimate."""
