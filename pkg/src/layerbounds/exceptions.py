"""Exception hierarchy shared by all modules."""


class LayerBoundsError(Exception):
    """Base class for all package errors."""


class DomainError(LayerBoundsError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(LayerBoundsError, ValueError):
    """A restriction set, preset or run configuration is malformed."""


class DataError(LayerBoundsError, ValueError):
    """Input data violate the schema or are insufficient for the request."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class DegenerateLayerError(LayerBoundsError, ZeroDivisionError):
    """A conditioning propensity is zero, so the requested ratio is undefined."""


class MonotonicityViolation(LayerBoundsError):
    """The employment rates contradict Lee monotonicity (trimming proportion > 1)."""


class FalsificationError(LayerBoundsError):
    """The identified set of response-type probabilities is empty.

    Attributes
    ----------
    certificate : float
        Optimal phase-one objective (total artificial infeasibility) of
        the feasibility program. Strictly positive when raised.
    """

    def __init__(self, message, certificate=float("nan")):
        super().__init__(message)
        self.certificate = certificate


class LPError(LayerBoundsError):
    """The linear program is infeasible or unbounded."""

    def __init__(self, message, status, certificate=float("nan")):
        super().__init__(message)
        self.status = status
        self.certificate = certificate
