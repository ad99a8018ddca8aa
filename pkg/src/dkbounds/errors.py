"""Exception hierarchy shared by every module."""


class DkBoundsError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class DomainError(DkBoundsError, ValueError):
    pass


class RangeError(DkBoundsError, ValueError):
    pass


class PoleError(DomainError):
    pass


class PrecisionExhausted(DkBoundsError, ArithmeticError):
    pass


class CapacityError(DkBoundsError, MemoryError):
    pass


class FactorizationTimeout(DkBoundsError, TimeoutError):
    pass


class TruncationError(DkBoundsError, ValueError):
    pass


class QuadratureError(PrecisionExhausted):
    pass


class UnsupportedCombination(DomainError):
    pass


class ConstraintUnsatisfiable(DomainError):
    pass


class MismatchError(DkBoundsError, ValueError):
    pass


class NoApplicableBound(DkBoundsError, LookupError):
    def __init__(self, message, nearest_threshold=None):
        super().__init__(message)
        self.nearest_threshold = nearest_threshold


class ConfigError(DkBoundsError, ValueError):
    pass
