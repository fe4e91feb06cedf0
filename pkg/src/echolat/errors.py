"""Exception types shared across the package.

Two broad families matter to callers: :class:`ValidationError` (the input
data itself is malformed or violates a documented precondition) and
:class:`NumericError` (the data was well formed but the computation cannot
produce a meaningful answer, e.g. a rank check failed).  The command-line
driver maps these families to distinct exit codes.
"""


class EcholatError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EcholatError):
    """Input data violates a documented invariant or precondition."""


class LengthMismatch(ValidationError):
    """Paired inputs (e.g. sensors and reception times) differ in length."""


class DimensionMismatch(ValidationError):
    """Vectors from incompatible ambient dimensions were combined."""


class DegenerateMirror(ValidationError):
    """A mirror point coincides with the source, so no plane is defined."""


class BudgetExceeded(ValidationError):
    """A combinatorial sweep would exceed the configured tuple budget."""


class ParseError(EcholatError):
    """A scenario file could not be parsed."""


class NumericError(EcholatError):
    """A computation failed for numerical reasons (rank, degeneracy, ...)."""


class RankDeficient(NumericError):
    """A matrix required to have full column rank does not."""


class NotSpanning(NumericError):
    """Sensor positions do not affinely span the ambient space."""


class DegenerateSystem(NumericError):
    """Every coefficient of the reduced quadratic vanished.

    For sensors that affinely span the space this cannot happen with
    consistent reception times, so it flags numerically inconsistent input.
    """


class InconsistentTimes(NumericError):
    """The reception times admit no real emission event."""
