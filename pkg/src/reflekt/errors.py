"""Exception types shared across the package."""


class ReflektError(Exception):
    """Base class for all package errors."""


class DivisionByZero(ReflektError, ZeroDivisionError):
    pass


class SpecializationPole(ReflektError):
    """A denominator vanished identically under a substitution."""


class ParseError(ReflektError, ValueError):
    pass


class LegMismatch(ReflektError):
    pass


class ShapeMismatch(ReflektError):
    pass


class Singular(ReflektError):
    pass


class InvalidDatum(ReflektError):
    pass


class DatumMismatch(ReflektError):
    pass


class RelationFailure(ReflektError):
    pass


class SolverInconsistent(ReflektError):
    pass


class SolverDegenerate(ReflektError):
    pass


class UnsupportedTwist(ReflektError):
    pass


class AxiomFailure(ReflektError):
    pass


class ConfigError(ReflektError):
    pass


class IOFailure(ReflektError):
    pass
