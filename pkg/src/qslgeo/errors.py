"""Exception hierarchy shared by the whole package.

Everything raised on purpose derives from :class:`QslError`, so callers
(and the CLI exit-code mapping) can distinguish expected failures from
genuine bugs.
"""


class QslError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(QslError):
    """An input object violates one of its declared invariants."""


class DimensionError(ValidationError):
    """Operands have incompatible or unsupported dimensions."""


class DomainError(ValidationError):
    """A scalar argument lies outside its admissible range."""


class MetricDivergenceError(QslError):
    """The requested metric is divergent at the state-space boundary."""


class GeodesicUnknownError(QslError):
    """No closed-form geodesic length is available for this metric."""


class SingularPointError(QslError):
    """A closed-form expression hits one of its singular loci."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class DegenerateEndpointError(QslError):
    """Tightness is undefined because the endpoints coincide."""


class QuadratureError(QslError):
    """The quadrature refinement loop failed to converge.

    Carries the last two panel-doubling estimates so the caller can see
    how far apart they were.
    """

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates
