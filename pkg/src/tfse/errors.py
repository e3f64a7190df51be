"""Exception types shared across the package."""


class TfseError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TfseError, ValueError):
    pass


class NonVanishingBoundary(TfseError, ValueError):
    pass


class MeshMismatch(TfseError, ValueError):
    pass


class HistoryTooShort(TfseError, ValueError):
    pass


class HistoryIncomplete(TfseError, ValueError):
    pass


class SingularShift(TfseError, ArithmeticError):
    pass


class NearSingular(TfseError, ArithmeticError):
    pass


class TooLarge(TfseError, ValueError):
    pass


class MemoryBudgetExceeded(TfseError, MemoryError):
    pass
