"""Positive almost-sure termination analysis for polynomial random walks."""

from .errors import (
    DegenerateVariance,
    DomainError,
    IncomparableAnchors,
    InsufficientTail,
    NonConvergence,
    PastwalkError,
    PreconditionViolated,
    SemanticError,
    WalkSyntaxError,
)
from .poly import Polynomial
from .walk import WalkSpec, check_preconditions, moments

__version__ = "0.1.0"
