"""Exception hierarchy.

Parameter problems derive from :class:`ValueError` so callers that only
care about "bad input" can catch that.
"""


class PeakAgeError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(PeakAgeError, ValueError):
    pass


class NonPositiveRate(ParameterError):
    pass


class ProbabilityOutOfRange(ParameterError):
    pass


class UnstableUtilization(ParameterError):
    pass


class NoAnalyticForm(PeakAgeError, ValueError):
    """The policy has no closed form (simulation only)."""


class InternalDomainError(PeakAgeError, ArithmeticError):
    """A closed form left its valid domain; indicates a bug or an override."""


class NonCausalDelivery(PeakAgeError, ValueError):
    pass


class EventBudgetExceeded(PeakAgeError, RuntimeError):
    pass


class InsufficientSamples(PeakAgeError, ValueError):
    pass


class MismatchedInputs(PeakAgeError, ValueError):
    pass


class EmptySweep(PeakAgeError, ValueError):
    pass
