"""Exception types raised across the package."""


class PastwalkError(Exception):
    """Base class for all package errors."""


class DomainError(PastwalkError, ValueError):
    """An argument lies outside the domain of a function."""


class DegenerateVariance(PastwalkError):
    """The step variance of a walk is identically zero."""


class PreconditionViolated(PastwalkError):
    """A walk does not satisfy the degree conditions an analysis needs."""


class IncomparableAnchors(PastwalkError):
    """Two bound sets were compared on different anchor vectors."""


class NonConvergence(PastwalkError):
    """An iterative solver hit its iteration cap."""


class InsufficientTail(PastwalkError):
    """Not enough usable survival points for a tail fit."""


class WalkSyntaxError(PastwalkError):
    """A walk expression could not be parsed.

    Attributes
    ----------
    line, column : int
        1-based position of the offending character.
    """

    def __init__(self, message, line=1, column=1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SemanticError(PastwalkError):
    """A syntactically valid walk document has invalid values."""
