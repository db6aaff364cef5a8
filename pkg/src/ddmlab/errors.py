"""Exception taxonomy shared across the package."""


class DDMLabError(Exception):
    """Base class for all package errors."""


class InvalidSymbol(DDMLabError):
    pass


class EmptyWord(DDMLabError):
    pass


class WindowTooSmall(DDMLabError):
    pass


class ModelError(DDMLabError):
    pass


class NotInA0(DDMLabError):
    """Raised when an evaluation needs a set generated by coordinates >= 0."""


class AbsoluteContinuityViolated(DDMLabError):
    pass


class ZeroMassConditioning(DDMLabError):
    pass


class ZeroMass(DDMLabError):
    pass


class DomainError(DDMLabError):
    pass


class ParameterRange(DDMLabError):
    pass


class HorizonTooSmall(DDMLabError):
    pass


class EmptyFamily(DDMLabError):
    pass


class AlphaOutOfRange(DDMLabError):
    pass


class ZeroLambdaMass(DDMLabError):
    pass


class ZeroPhi(DDMLabError):
    pass


class EngineError(DDMLabError):
    pass


class ConfigError(DDMLabError):
    """Configuration rejected; ``path`` points at the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message


class NotIrreducibleWarning(UserWarning):
    pass


class NotErgodicWarning(UserWarning):
    pass
