"""Exception types raised across the package."""


class OrliczError(Exception):
    """Base class for every error raised by ncorlicz."""


class NegativeArgument(OrliczError, ValueError):
    pass


class OutOfDomain(OrliczError, ValueError):
    pass


class Unreachable(OrliczError, ValueError):
    """The requested level exceeds the supremum of the function on its domain."""


class ConjugateDiverges(OrliczError, ArithmeticError):
    pass


class ConjugateUnavailable(OrliczError, ArithmeticError):
    pass


class DegenerateGrid(OrliczError, ValueError):
    pass


class InvalidOrliczFunction(OrliczError, ValueError):
    pass


class NumericalFailure(OrliczError, ArithmeticError):
    pass


class ShapeMismatch(OrliczError, ValueError):
    pass


class RankTooLarge(OrliczError, ValueError):
    pass


class BracketFailure(OrliczError, ArithmeticError):
    pass


class InfeasibleWitness(OrliczError, ValueError):
    pass


class FamilyGenerationFailure(OrliczError, RuntimeError):
    pass


class AmplitudeRuleViolation(OrliczError, ValueError):
    pass


class ProbeOnBreakpoint(OrliczError, ValueError):
    pass


class SchemaError(OrliczError, ValueError):
    """Malformed input document; ``path`` points at the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class IoError(OrliczError, OSError):
    pass
