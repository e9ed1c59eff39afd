"""Exception hierarchy shared by all solver modules."""


class SolverError(Exception):
    """Base class for every error raised by exnerdg."""


class ConfigurationError(SolverError, ValueError):
    """Invalid configuration value (degree out of range, unknown key, ...)."""


class ParameterError(SolverError, ValueError):
    """Physical parameters that make an operation undefined."""


class PositivityError(SolverError):
    """Water height fell below the positivity floor.

    ``location`` is ``(element, node)`` when raised from the DG assembly,
    otherwise ``None``.
    """

    def __init__(self, message, state=None, location=None, time=None):
        super().__init__(message)
        self.state = state
        self.location = location
        self.time = time


class InversionError(SolverError):
    """Entropy variables do not map back to an admissible state."""


class PathError(SolverError):
    """A quadrature point on the entropy-variable path left the admissible set."""


class HyperbolicityError(SolverError):
    """Generalized Jacobian has complex eigenvalues."""


class DegeneracyError(SolverError):
    """Eigenvalues too close to build the inverse eigenvector matrix."""


class BlendContractError(SolverError):
    """The LLF reference viscosity produced entropy instead of dissipating it."""


class NonFiniteError(SolverError):
    """NaN or Inf detected in the solution."""
