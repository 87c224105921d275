"""Exception hierarchy shared by the simulator modules."""


class RydoscError(Exception):
    """Base class for all errors raised by this package."""


class TruncationError(RydoscError):
    """A state leaks population into the top levels of the Fock space."""


class DomainError(RydoscError, ValueError):
    """Arguments outside the mathematical domain of an operation."""


class QuadratureError(RydoscError):
    """Numerical integration did not reach the requested tolerance."""


class StiffnessError(RydoscError):
    """The adaptive integrator needed a step below its floor."""


class GridError(RydoscError):
    """A phase-space grid does not contain the state it samples."""


class ConfigError(RydoscError, ValueError):
    """Malformed or inconsistent run configuration."""
