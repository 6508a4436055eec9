"""Exception hierarchy.

Every error raised on bad geometric input derives from :class:`DomainError`;
the CLI maps those to exit code 3.  :class:`NonConvergence` is kept separate
because it signals numerical trouble, not bad data (exit code 4).
"""


class ConevolError(Exception):
    """Base class for all package errors."""


class DomainError(ConevolError, ValueError):
    """Input violates a mathematical precondition."""


class NotFullDimensional(DomainError):
    pass


class DegenerateGenerators(DomainError):
    pass


class TailMismatch(DomainError):
    pass


class NonPositiveDirection(DomainError):
    pass


class NotQGorenstein(DomainError):
    pass


class NotFano(DomainError):
    pass


class ReebConeViolation(DomainError):
    pass


class EmptySupport(DomainError):
    pass


class EmptyMeasure(DomainError):
    pass


class InvalidParams(DomainError):
    pass


class OutsideMomentCone(DomainError):
    pass


class ImproperDivisor(DomainError):
    pass


class ImproperDegeneration(DomainError):
    pass


class NoFlatDegeneration(DomainError):
    pass


class NonConvergence(ConevolError, RuntimeError):
    pass


class ParseError(ConevolError, ValueError):
    """Malformed input document (CLI exit code 2)."""
