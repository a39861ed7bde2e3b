"""Polynomial random walks and their step moments.

A walk is the loop::

    n = 0; y = y0
    while y > 0:
        n += 1
        y += q1(n) with probability p, else q2(n)
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .errors import DegenerateVariance, DomainError
from .poly import NEG_INF, Polynomial, _frac


@dataclass(frozen=True)
class WalkSpec:
    """Branch polynomials, branch probability and start value of a walk.

    ``q1 == q2`` is accepted here (the walk is then deterministic and can
    still be simulated); :func:`moments` rejects it.
    """

    q1: Polynomial
    q2: Polynomial
    p: Fraction
    y0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", _frac(self.p))
        object.__setattr__(self, "y0", _frac(self.y0))
        if not 0 < self.p < 1:
            raise DomainError(f"branch probability must lie in (0, 1), got {self.p}")
        if self.y0 <= 0:
            raise DomainError(f"initial value must be positive, got {self.y0}")

    @property
    def degree(self):
        """Walk degree: the larger of the two branch degrees."""
        return max(self.q1.degree(), self.q2.degree())

    def swapped(self):
        """The same walk with branches (and probabilities) exchanged."""
        return WalkSpec(self.q2, self.q1, 1 - self.p, self.y0)


@dataclass(frozen=True)
class WalkMoments:
    mean: Polynomial
    var: Polynomial
    spread: Polynomial
    abs3: Callable[[float], float]
    abs3_factor: Fraction
    p: Fraction
    y0: Fraction
    deg_walk: object
    deg_mean: object
    deg_var: object

    @property
    def C1(self):
        """Sub-Gaussian constant ``4 p (1 - p)`` of the two-point step."""
        return float(4 * self.p * (1 - self.p))

    @property
    def zero_mean(self):
        return self.mean.is_zero


def moments(w):
    """Mean, central variance and third absolute central moment of a step.

    With ``D = q1 - q2`` the step deviates from its mean by ``(1-p) D``
    or ``-p D``, so ``var = p (1-p) D^2`` and
    ``E|X - EX|^3 = p (1-p) ((1-p)^2 + p^2) |D|^3``.

    Raises
    ------
    DegenerateVariance
        If the two branches coincide.
    """
    p = w.p
    spread = w.q1 - w.q2
    if spread.is_zero:
        raise DegenerateVariance("q1 == q2: the walk has zero variance")
    mean = p * w.q1 + (1 - p) * w.q2
    var = (p * (1 - p)) * spread * spread
    factor = p * (1 - p) * ((1 - p) ** 2 + p**2)
    f = float(factor)

    def abs3(n):
        return f * abs(spread.eval_float(n)) ** 3

    return WalkMoments(
        mean=mean,
        var=var,
        spread=spread,
        abs3=abs3,
        abs3_factor=factor,
        p=p,
        y0=w.y0,
        deg_walk=w.degree,
        deg_mean=mean.degree(),
        deg_var=var.degree(),
    )


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the degree conditions on a walk.

    ``variance_dominance`` is ``deg(var) > 2 deg(mean) + 1`` (needed for
    the normal approximation of window sums); ``drift`` is
    ``deg(walk) > deg(mean)``.  ``threshold`` is filled in only when a
    degree threshold estimate is available.
    """

    variance_dominance: bool
    drift: bool
    threshold: Optional[bool] = None

    @property
    def ok(self):
        return self.variance_dominance and self.drift and self.threshold is not False


def check_preconditions(m, d_min=None):
    """Evaluate the degree conditions; ``d_min`` adds a threshold comparison."""
    deg_mean = m.deg_mean
    dominance = deg_mean == NEG_INF or m.deg_var > 2 * deg_mean + 1
    drift = deg_mean == NEG_INF or m.deg_walk > deg_mean
    threshold = None if d_min is None else m.deg_walk >= d_min
    return ConditionReport(dominance, drift, threshold)
