"""Exception types raised across the package."""


class PreflearnError(Exception):
    """Base class for all package errors."""


class UsageError(PreflearnError, ValueError):
    """Invalid arguments or configuration (CLI exit code 2)."""


class DomainError(PreflearnError, ValueError):
    """An input lies outside the declared domain of an operation."""


class NoPreimageError(DomainError):
    """A point has no preimage inside the embedding's input box."""


class UnsupportedNoiseError(PreflearnError, ValueError):
    """The operation is undefined for the given noise model."""


class LearnerAbort(PreflearnError, RuntimeError):
    """A learner gave up on a configuration (CLI exit code 3)."""


class NumericalError(PreflearnError, ArithmeticError):
    pass
