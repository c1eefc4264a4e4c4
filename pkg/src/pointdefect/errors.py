"""Exception hierarchy shared by all modules."""


class PointDefectError(Exception):
    """Base class for library errors."""


class NonFinite(PointDefectError, ValueError):
    pass


class ConstraintViolation(PointDefectError, ValueError):
    """Connection parameters violate alpha*gamma - beta*delta = 1."""


class NonPositiveSeparation(PointDefectError, ValueError):
    pass


class LawConstraintViolation(PointDefectError, ValueError):
    pass


class SingularDenominator(PointDefectError, ZeroDivisionError):
    pass


class NonPositiveWidth(PointDefectError, ValueError):
    pass


class OverlappingSupports(PointDefectError, ValueError):
    pass


class GridTooCoarse(PointDefectError, ValueError):
    pass


class GridMismatch(PointDefectError, ValueError):
    pass


class NegativeDistance(PointDefectError, ValueError):
    pass


class UnsupportedInteraction(PointDefectError, TypeError):
    pass


class NotAnEigenvalue(PointDefectError, ValueError):
    pass


class NoConvergence(PointDefectError, RuntimeError):
    pass


class WindowOutOfRange(PointDefectError, ValueError):
    pass


class IllConditionedFit(PointDefectError, ValueError):
    pass


class DegenerateInputs(PointDefectError, ValueError):
    pass


class ConfigError(PointDefectError, ValueError):
    """Invalid run configuration; the message names the offending field."""
