"""Exception hierarchy for dotchain."""


class DotChainError(Exception):
    """Base class for all dotchain errors."""


class ValidationError(DotChainError, ValueError):
    """Bad input: shapes, ranges, or configuration."""


class DimensionOverflow(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class SectorViolation(ValidationError):
    pass


class NonHermitianInput(ValidationError):
    pass


class NegativeRate(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class InvalidDensityMatrix(ValidationError):
    pass


class ArmMismatch(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NumericalError(DotChainError, ArithmeticError):
    """A numerical quality gate was violated."""


class NormDriftExceeded(NumericalError):
    pass


class NoResonanceFound(DotChainError):
    pass


class NoMinimumFound(DotChainError):
    pass
