"""Exception types shared across the package.

Every failure mode that a caller can reasonably recover from gets its own
class so that callers can branch on the type instead of parsing messages.
"""


class MrelabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MrelabError):
    """A scenario file or parameter dict is malformed or inconsistent."""

    def __init__(self, message, path=None):
        self.path = path
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class OrderTooHigh(MrelabError):
    """Requested Sobolev order exceeds what the stencils support."""


class CompatibilityError(MrelabError):
    """Neumann problem right-hand side violates the solvability condition."""


class SingularSystemError(MrelabError):
    """A linear system that should be invertible is numerically singular."""


class NotSolenoidal(MrelabError):
    """A field that must be divergence free has too large a divergence."""


class NotEigenfunction(MrelabError):
    """Initial profile is not an eigenfunction of -d^2/dx^2 at the given wavenumber."""


class DomainViolation(MrelabError):
    """Input field lies outside the operator's admissible subspace."""


class CflViolation(MrelabError):
    """Requested time step exceeds the stability limit of the integrator."""


class BlowupDetected(MrelabError):
    """Solution norm crossed the blow-up guard threshold during a run."""


class StepFailure(MrelabError):
    """The ODE integrator failed to complete a step within tolerances."""


class NoReturn(MrelabError):
    """A trajectory produced no section return within the search horizon."""


class CriticalPoint(MrelabError):
    """Orbit computation was requested at a point where the field vanishes."""
