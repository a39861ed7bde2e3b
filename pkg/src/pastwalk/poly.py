"""Exact univariate polynomials in the loop counter ``n``.

Coefficients are :class:`fractions.Fraction`.  Exponents are normally
non-negative integers, but rational exponents (``n^(1/2)``) are allowed
so that sub-linear walks can be represented; such polynomials evaluate
through float powers and have no closed-form range sum.
"""

import math
from fractions import Fraction
from functools import lru_cache
from math import comb

NEG_INF = float("-inf")
"""Degree marker of the zero polynomial."""


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # decimal reading, so 0.99 means 99/100 rather than the binary value
        return Fraction(repr(x))
    return Fraction(x)


class Polynomial:
    """Immutable polynomial ``sum c_e * n**e``.

    Parameters
    ----------
    coeffs : sequence, optional
        Coefficients by ascending integer power, ``coeffs[i]`` for
        ``n**i``.  Trailing zeros are dropped; the zero polynomial has
        an empty coefficient list.

    Examples
    --------
    >>> p = Polynomial([1, 2, 1])
    >>> p(3)
    Fraction(16, 1)
    >>> str(p)
    'n^2 + 2n + 1'
    """

    __slots__ = ("_terms",)

    def __init__(self, coeffs=()):
        terms = {}
        for i, c in enumerate(coeffs):
            c = _frac(c)
            if c:
                terms[Fraction(i)] = c
        self._terms = tuple(sorted(terms.items()))

    @classmethod
    def from_terms(cls, terms):
        """Build from a mapping ``{exponent: coefficient}``.

        Exponents must be non-negative rationals.
        """
        acc = {}
        for e, c in dict(terms).items():
            e, c = _frac(e), _frac(c)
            if e < 0:
                raise ValueError(f"negative exponent {e}")
            acc[e] = acc.get(e, Fraction(0)) + c
        p = cls.__new__(cls)
        p._terms = tuple(sorted((e, c) for e, c in acc.items() if c))
        return p

    @classmethod
    def constant(cls, c):
        return cls([c])

    @classmethod
    def monomial(cls, exponent, coeff=1):
        return cls.from_terms({exponent: coeff})

    # -- structure ------------------------------------------------------

    @property
    def terms(self):
        """Tuple of ``(exponent, coefficient)`` pairs, ascending."""
        return self._terms

    @property
    def is_zero(self):
        return not self._terms

    @property
    def is_integral(self):
        """True if every exponent is an integer."""
        return all(e.denominator == 1 for e, _ in self._terms)

    @property
    def coeffs(self):
        """Dense coefficient list by ascending power (integral polynomials only)."""
        if not self.is_integral:
            raise ValueError("polynomial has fractional exponents")
        if self.is_zero:
            return []
        out = [Fraction(0)] * (int(self._terms[-1][0]) + 1)
        for e, c in self._terms:
            out[int(e)] = c
        return out

    def degree(self):
        """Leading exponent; an ``int`` when integral, :data:`NEG_INF` for zero."""
        if self.is_zero:
            return NEG_INF
        e = self._terms[-1][0]
        return int(e) if e.denominator == 1 else e

    @property
    def leading_coefficient(self):
        return self._terms[-1][1] if self._terms else Fraction(0)

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        return Polynomial([other])

    def __add__(self, other):
        other = self._coerce(other)
        acc = dict(self._terms)
        for e, c in other._terms:
            acc[e] = acc.get(e, Fraction(0)) + c
        return Polynomial.from_terms(acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial.from_terms({e: -c for e, c in self._terms})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        acc = {}
        for e1, c1 in self._terms:
            for e2, c2 in other._terms:
                acc[e1 + e2] = acc.get(e1 + e2, Fraction(0)) + c1 * c2
        return Polynomial.from_terms(acc)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = Polynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            try:
                other = Polynomial([other])
            except (TypeError, ValueError):
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    # -- evaluation -----------------------------------------------------

    def __call__(self, x):
        return evaluate(self, x)

    def eval_float(self, x):
        """Float evaluation, also valid for fractional exponents."""
        x = float(x)
        return math.fsum(float(c) * x ** float(e) for e, c in self._terms)

    def __repr__(self):
        return f"Polynomial.from_terms({dict(self._terms)!r})"

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for e, c in reversed(self._terms):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                coef = "" if mag == 1 else str(mag)
                if "/" in coef:
                    coef = f"({coef})"
                if e == 1:
                    body = f"{coef}n"
                else:
                    ex = str(e)
                    body = f"{coef}n^{ex if e.denominator == 1 else '(' + ex + ')'}"
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out


def add(p, q):
    return p + q


def mul(p, q):
    return p * q


def degree(p):
    return p.degree()


def evaluate(p, x):
    """Evaluate ``p`` at ``x``.

    Exact (Horner, rational arithmetic) for integral polynomials and
    rational ``x``; fractional exponents fall back to float.
    """
    if not p.is_integral:
        return p.eval_float(x)
    if isinstance(x, float):
        x = _frac(x)
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=None)
def bernoulli(n):
    """Bernoulli number ``B_n`` with the ``B_1 = +1/2`` convention."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    out = b[n]
    return -out if n == 1 else out


@lru_cache(maxsize=None)
def _power_sum(k):
    # Faulhaber: sum_{i=1}^N i^k = 1/(k+1) sum_j C(k+1, j) B_j N^(k+1-j)
    coeffs = [Fraction(0)] * (k + 2)
    for j in range(k + 1):
        coeffs[k + 1 - j] += Fraction(comb(k + 1, j)) * bernoulli(j) / (k + 1)
    return Polynomial(coeffs)


def range_sum(p):
    """Polynomial ``S`` with ``S(N) = sum_{i=1}^N p(i)`` for integers ``N >= 0``.

    Only defined for integral polynomials; see :func:`window_sum_bounds`
    for fractional exponents.
    """
    if not p.is_integral:
        raise ValueError("range_sum needs integer exponents; use window_sum_bounds")
    out = Polynomial()
    for e, c in p.terms:
        out = out + c * _power_sum(int(e))
    return out


def window_sum(p, lo, hi):
    """``sum_{i=lo}^{hi} p(i)``, exact for integral polynomials.

    For fractional exponents returns the midpoint of
    :func:`window_sum_bounds` as a float.
    """
    if hi < lo:
        return Fraction(0)
    if p.is_integral:
        s = range_sum(p)
        return s(hi) - s(lo - 1)
    low, high = window_sum_bounds(p, lo, hi)
    return 0.5 * (low + high)


DIRECT_SUM_LIMIT = 100_000


def window_sum_bounds(p, lo, hi):
    """Lower and upper bound on ``sum_{i=lo}^{hi} p(i)`` (floats).

    Short windows are summed directly.  Long ones bracket each monotone
    term ``c * n**e`` between the integrals over ``[lo-1, hi]`` and
    ``[lo, hi+1]``.
    """
    lo, hi = int(lo), int(hi)
    if hi < lo:
        return 0.0, 0.0
    if p.is_integral:
        v = float(window_sum(p, lo, hi))
        return v, v
    if hi - lo < DIRECT_SUM_LIMIT:
        s = math.fsum(p.eval_float(i) for i in range(lo, hi + 1))
        slack = 1e-12 * abs(s)
        return s - slack, s + slack
    low = high = 0.0
    for e, c in p.terms:
        e, c = float(e), float(c)
        if e == 0.0:
            low += c * (hi - lo + 1)
            high += c * (hi - lo + 1)
            continue
        prim = lambda x: x ** (e + 1.0) / (e + 1.0)
        left = prim(hi) - prim(max(lo - 1, 0))
        right = prim(hi + 1) - prim(lo)
        small, big = sorted((c * left, c * right))
        low += small
        high += big
    return low, high
