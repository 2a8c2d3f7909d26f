"""Exception hierarchy shared by every module."""


class PedalLabError(Exception):
    """Base class for all library errors."""


class ExpressionSyntaxError(PedalLabError, ValueError):
    def __init__(self, message, offset, source=None):
        self.offset = offset
        self.source = source
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


class JetDomainError(PedalLabError, ValueError):
    """A function was evaluated outside its domain (log of a negative, 1/0, ...)."""


class SingularFrameError(PedalLabError, ArithmeticError):
    """The tangent + transversal frame is not invertible at the point."""


class DegenerateMetricError(PedalLabError, ArithmeticError):
    pass


class IndefiniteMetricError(PedalLabError, ValueError):
    pass


class SingularPointError(PedalLabError, ArithmeticError):
    """A line field was requested at one of its singular points."""


class EverywhereSingularError(PedalLabError, ArithmeticError):
    def __init__(self, kind, fraction):
        self.kind = kind
        self.fraction = fraction
        super().__init__(
            f"field is {kind}-singular on an open set ({fraction:.0%} of grid points)")


class WindingError(PedalLabError, ArithmeticError):
    def __init__(self, message, residual=None, samples=None):
        self.residual = residual
        self.samples = samples
        super().__init__(message)


class PoleError(PedalLabError, ArithmeticError):
    def __init__(self, message, point):
        self.point = point
        super().__init__(f"{message} at {point}")


class ConfigError(PedalLabError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
