"""Scalar special functions: normal CDF, its inverse, Hurwitz zeta."""

import math
from fractions import Fraction

import numpy as np
from scipy.special import ndtr

from .errors import DomainError

_SQRT2 = math.sqrt(2.0)

# Euler-Maclaurin setup for the Hurwitz zeta tail: direct terms, then
# corrections through the B_8 Bernoulli term.
ZETA_DIRECT_TERMS = 32
_BERNOULLI = (Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30))


def phi(x):
    """Standard normal CDF.

    Evaluated as ``erfc(-x / sqrt(2)) / 2``, which keeps full relative
    accuracy in the left tail.  Saturates to exactly 0 or 1 for
    ``|x| > 40``.
    """
    x = float(x)
    if x > 40.0:
        return 1.0
    if x < -40.0:
        return 0.0
    return 0.5 * math.erfc(-x / _SQRT2)


def phi_array(x):
    """Vectorized :func:`phi` for numpy arrays."""
    return ndtr(np.asarray(x, dtype=float))


def phi_inv(q, tol=1e-15):
    """Inverse of :func:`phi` by bracketed bisection.

    Parameters
    ----------
    q : float
        Probability strictly between 0 and 1.
    tol : float
        Bracket width at which bisection stops.

    Raises
    ------
    DomainError
        If ``q`` is not in the open interval (0, 1).
    """
    q = float(q)
    if not 0.0 < q < 1.0:
        raise DomainError(f"phi_inv needs 0 < q < 1, got {q}")
    lo, hi = -40.0, 40.0
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if phi(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hurwitz_zeta(s, a):
    """Hurwitz zeta function ``sum_{n>=0} (n + a)**(-s)`` for real ``s > 1``.

    The first ``ZETA_DIRECT_TERMS`` terms are summed directly and the
    remainder is approximated by the Euler-Maclaurin formula.

    Raises
    ------
    DomainError
        If ``s <= 1`` (divergent series) or ``a <= 0``.
    """
    s = float(s)
    a = float(a)
    if s <= 1.0:
        raise DomainError(f"hurwitz_zeta diverges for s <= 1, got s={s}")
    if a <= 0.0:
        raise DomainError(f"hurwitz_zeta needs a > 0, got a={a}")
    n_direct = ZETA_DIRECT_TERMS
    head = math.fsum((k + a) ** -s for k in range(n_direct))
    x = n_direct + a
    tail = x ** (1.0 - s) / (s - 1.0) + 0.5 * x ** -s
    # sum_k B_2k / (2k)! * s(s+1)...(s+2k-2) * x^(-s-2k+1)
    rising = s
    power = x ** (-s - 1.0)
    fact = 2.0
    for k, b2k in enumerate(_BERNOULLI, start=1):
        tail += float(b2k) / fact * rising * power
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power /= x * x
        fact *= (2 * k + 1) * (2 * k + 2)
    return head + tail
