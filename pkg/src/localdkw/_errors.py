"""Exception hierarchy shared by every module."""


class LocalDkwError(ValueError):
    """Base class for all errors raised by localdkw."""


class InvalidQuery(LocalDkwError):
    pass


class UnsortedInput(LocalDkwError):
    pass


class EmptySample(LocalDkwError):
    pass


class SupportViolation(LocalDkwError):
    pass


class UnboundedSupport(LocalDkwError):
    pass


class NegativeSupport(LocalDkwError):
    pass


class PartitionIncompatible(LocalDkwError):
    pass


class InvalidLedger(LocalDkwError):
    pass


class TooEarly(LocalDkwError):
    """Sample count too small for the peeling radius (N <= eta - 1)."""


class EpsTooSmall(LocalDkwError):
    """Threshold below the reflection-inequality floor; the peeling step is vacuous."""


class InvalidParams(LocalDkwError):
    pass


class DeltaOverflow(LocalDkwError):
    """A schedule produced a per-step confidence level above 1."""
