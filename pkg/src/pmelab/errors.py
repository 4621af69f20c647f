"""Exception hierarchy shared by all modules."""


class PmeLabError(Exception):
    """Base class for errors raised by pmelab."""


class DomainError(PmeLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(PmeLabError, ValueError):
    """A query falls outside the range covered by a profile, table or Green function."""


class InvalidProfileError(PmeLabError, ValueError):
    """A warping profile violates the class-A requirements."""


class NotNonparabolicError(PmeLabError):
    """The manifold is parabolic, so the whole-manifold Green function is infinite."""


class ConfigurationError(PmeLabError, ValueError):
    """Incompatible objects were combined, or a configuration is invalid."""


class StepFailure(PmeLabError):
    """Newton iteration did not converge within the iteration budget."""


class InsufficientDataError(PmeLabError, ValueError):
    """Too few samples to perform a fit."""
