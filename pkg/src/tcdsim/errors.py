"""Exception hierarchy shared by the simulator modules."""


class TCDError(Exception):
    """Base class for all simulator errors."""


class ValidationError(TCDError, ValueError):
    """An input violates a documented invariant."""


class LayoutError(ValidationError):
    """Tensor-factor labels are unknown, duplicated or mismatched."""


class SingularityError(TCDError, ArithmeticError):
    """An amplitude denominator vanished."""


class InsufficientSpanError(ValidationError):
    """A screen grid does not cover one full fringe period."""


class SamplingError(TCDError):
    """A conditional density could not be sampled."""
