"""Exception types raised by the engine."""


class CohFTError(ValueError):
    """Base class for all engine errors."""


class StructuralError(CohFTError):
    """Malformed input: wrong lengths, indices out of range, mismatched spaces."""


class DomainError(CohFTError):
    """Input outside the mathematical domain (unstable moduli, bad parity, ...)."""


class ParityError(DomainError):
    pass


class StabilityError(DomainError):
    pass
