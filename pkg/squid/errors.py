"""
Exception hierarchy for squidleak.

ConfigurationError subclasses map to CLI exit code 1,
NumericalError subclasses to exit code 2.
"""

from typing import Optional


class SquidLeakError(Exception):
    """Base class for every error raised by squidleak."""


# ── Configuration errors (exit 1) ─────────────────────────────────────────────

class ConfigurationError(SquidLeakError, ValueError):
    """Invalid input: config file, parameters, grid or sweep definition."""


class InvalidParameterError(ConfigurationError):
    """A device, working or drive parameter is outside its valid range."""


class GridConfigurationError(ConfigurationError):
    """The Fourier grid cannot represent the wells or the retained states."""


class GridMismatchError(ConfigurationError):
    """Two leakage maps were compared on different grids."""


# ── Numerical errors (exit 2) ─────────────────────────────────────────────────

class NumericalError(SquidLeakError, RuntimeError):
    """A numerical procedure failed or produced an unusable result."""

    flag = "numeric_failure"


class FourWellStructureLost(NumericalError):
    """The coupled potential does not have exactly four local minima."""

    flag = "four_well_lost"

    def __init__(self, count: int, message: Optional[str] = None):
        self.count = count
        super().__init__(message or f"Expected 4 potential wells, found {count}")


class ComputationalBasisUndefined(NumericalError):
    """No eigenstate is localized enough in one of the four wells."""

    flag = "basis_undefined"


class EigensolverError(NumericalError):
    """Dense symmetric eigendecomposition failed."""

    flag = "eigensolver_failed"


class IntegrationFailure(NumericalError):
    """The TDSE integrator could not meet its accuracy contract."""

    flag = "integration_failed"


class NoCouplingError(NumericalError):
    """The |10> <-> |11> drive matrix element vanishes."""

    flag = "no_coupling"


class RefinementFailed(NumericalError):
    """Every point of the refinement neighborhood was flagged."""

    flag = "refinement_failed"

    def __init__(self, message: str, result=None):
        self.result = result
        super().__init__(message)
