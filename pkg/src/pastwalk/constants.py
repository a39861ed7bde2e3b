"""Error constants of the window-summed walk.

The transformed walk first accumulates steps ``1..n0`` (plus ``y0``) and
then sums windows ``(n', ceil(k n')]`` with ``n'`` running over the
geometric grid ``n0, ceil(k n0), ceil(k ceil(k n0)), ...``.  Each window
sum is treated as an almost-normal variable; this module bounds how far
it is from normal (``c0``), the offset of its sub-Gaussian tail
(``delta1``) and the slack in the variance growth between windows
(``delta_prime``).
"""

import math
from dataclasses import dataclass

from .errors import DomainError, PreconditionViolated
from .poly import NEG_INF, Polynomial, range_sum, window_sum_bounds
from .walk import check_preconditions

BERRY_ESSEEN = 0.5591
"""Upper bound on the Berry-Esseen constant for independent summands."""

EXPONENT_ONLY_C0 = 1e-8
EXPONENT_ONLY_DELTA1 = 1e-8
EXPONENT_ONLY_DELTA_PRIME = 1.0 - 1e-8

MIN_GRID_STEPS = 20
MAX_GRID_STEPS = 5000
DOMINANCE = 0.01
TAIL_FACTOR = 1.1

CERTIFIED = "certified"
EXPONENT_ONLY = "exponent-only"
MODES = (CERTIFIED, EXPONENT_ONLY)


@dataclass(frozen=True)
class TransformParams:
    """Parameters of the program transformation.

    ``n0`` warm-up steps, window growth ``k``, variance growth ratio
    ``d`` and conditioning fraction ``epsilon``.
    """

    n0: int
    k: float
    d: float
    epsilon: float

    def __post_init__(self):
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise DomainError(f"n0 must be a positive integer, got {self.n0}")
        if not self.k > 1:
            raise DomainError(f"k must exceed 1, got {self.k}")
        if not self.d > 0:
            raise DomainError(f"d must be positive, got {self.d}")
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")

    @property
    def tau(self):
        """Rounding slack ``1 / n0`` added to ``k`` in the survival bound."""
        return 1.0 / self.n0

    def consistent_with(self, delta_prime, deg_walk, rel=1e-9):
        """Whether ``d == delta_prime * k**(2 deg + 1) - 1`` within ``rel``."""
        target = delta_prime * self.k ** (2 * float(deg_walk) + 1) - 1
        return abs(target - self.d) <= rel * max(1.0, abs(self.d))


@dataclass(frozen=True)
class ErrorConstants:
    c0: float
    delta1: float
    delta_prime: float
    C1: float
    b: float


def compute_b(epsilon, d, C1):
    """Smallest admissible offset of the preserved sub-Gaussian tail.

    ``sqrt(2 ln(1/(1-eps))) / (sqrt(C1) (sqrt(1+d) - 1))``
    """
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not d > 0:
        raise DomainError(f"d must be positive, got {d}")
    if not 0 < C1 <= 1:
        raise DomainError(f"C1 must lie in (0, 1], got {C1}")
    return math.sqrt(2.0 * math.log(1.0 / (1.0 - epsilon))) / (
        math.sqrt(C1) * (math.sqrt(1.0 + d) - 1.0)
    )


def geometric_grid(n0, k):
    """Yield the window starts ``n0, ceil(k n0), ...`` forever."""
    n = int(n0)
    while True:
        yield n
        nxt = math.ceil(k * n)
        n = nxt if nxt > n else n + 1


def _lower_mass(poly, n):
    """Ratio of the non-leading terms' magnitude to the leading term at ``n``."""
    if poly.is_zero:
        return 0.0
    terms = poly.terms
    top_e, top_c = terms[-1]
    n = float(n)
    lead = abs(float(top_c)) * n ** float(top_e)
    rest = sum(abs(float(c)) * n ** float(e) for e, c in terms[:-1])
    return rest / lead


def _root_bound(poly):
    """Cauchy bound: ``poly`` has constant sign for ``n`` beyond it."""
    top = abs(poly.terms[-1][1])
    return 1 + max((abs(c) / top for _, c in poly.terms[:-1]), default=0)


class _WindowSums:
    """Cached window sums of the step mean, variance and third moment."""

    def __init__(self, m):
        self.m = m
        self.integral = m.var.is_integral and m.mean.is_integral
        if self.integral:
            self._var = range_sum(m.var)
            self._mean = range_sum(m.mean) if not m.mean.is_zero else None
            cube = m.spread**3
            self._cube = range_sum(cube)
            self._root = math.ceil(_root_bound(cube))
            self._sign = 1 if cube.leading_coefficient > 0 else -1

    def var(self, lo, hi):
        """(lower, upper) bound on the variance sum over steps lo..hi."""
        if self.integral:
            v = float(self._var(hi) - self._var(lo - 1))
            return v, v
        return window_sum_bounds(self.m.var, lo, hi)

    def abs_mean(self, lo, hi):
        """Upper bound on ``|sum of step means|`` over lo..hi."""
        if self.m.mean.is_zero:
            return 0.0
        if self.integral:
            return abs(float(self._mean(hi) - self._mean(lo - 1)))
        low, high = window_sum_bounds(self.m.mean, lo, hi)
        return max(abs(low), abs(high))

    def abs3(self, lo, hi):
        """Upper bound on the summed third absolute central moments."""
        m = self.m
        if self.integral:
            total = 0.0
            if lo <= self._root:
                top = min(hi, self._root)
                total += math.fsum(m.abs3(i) for i in range(lo, top + 1))
                lo = top + 1
            if lo <= hi:
                s = self._cube(hi) - self._cube(lo - 1)
                total += float(m.abs3_factor * self._sign * s)
            return total
        return window_sum_bounds(_abs_cube_majorant(m), lo, hi)[1]

    def dominant_at(self, n):
        """Whether every summed polynomial is within 1% of its leading term."""
        m = self.m
        polys = [m.var, m.spread]
        if not m.mean.is_zero:
            polys.append(m.mean)
        return all(_lower_mass(q, n) < DOMINANCE for q in polys)


def _abs_cube_majorant(m):
    # |sum c_e n^e|^3 <= (sum |c_e| n^e)^3 for fractional exponents
    absd = Polynomial.from_terms({e: abs(c) for e, c in m.spread.terms})
    return m.abs3_factor * absd * absd * absd


def _require_dominance(m):
    if not check_preconditions(m).variance_dominance:
        raise PreconditionViolated(
            f"variance degree {m.deg_var} does not exceed 2*{m.deg_mean}+1"
        )


def _warmup_terms(sums, m, n0):
    var_lo, _ = sums.var(1, n0)
    if var_lo <= 0:
        raise PreconditionViolated("warm-up variance is zero; increase n0")
    sd = math.sqrt(var_lo)
    be = BERRY_ESSEEN * sums.abs3(1, n0) / var_lo**1.5
    if m.mean.is_zero:
        shift = float(m.y0)
    elif sums.integral:
        shift = abs(float(m.y0 + sums._mean(n0)))
    else:
        low, high = window_sum_bounds(m.mean, 1, n0)
        shift = max(abs(float(m.y0) + low), abs(float(m.y0) + high))
    return be, shift / sd


def _window_terms(sums, n, k):
    hi = math.ceil(k * n)
    hi = hi if hi > n else n + 1
    var_lo, _ = sums.var(n + 1, hi)
    sd = math.sqrt(var_lo)
    be = BERRY_ESSEEN * sums.abs3(n + 1, hi) / var_lo**1.5
    drift = sums.abs_mean(n + 1, hi) / sd
    return be, drift


def _window_sup(sums, t, term):
    """Sup of ``term(n')`` over the window grid, with a tail allowance."""
    best = 0.0
    last = 0.0
    for step, n in enumerate(geometric_grid(t.n0, t.k)):
        last = term(n)
        best = max(best, last)
        if step + 1 >= MIN_GRID_STEPS and sums.dominant_at(n):
            break
        if step + 1 >= MAX_GRID_STEPS:
            break
    return max(best, TAIL_FACTOR * last)


def compute_c0(m, t):
    """Bound on the CDF distance between window sums and the normal law.

    Maximum of the warm-up bound (Berry-Esseen plus the shift from
    ``y0`` and the drift) and the sup over windows of Berry-Esseen plus
    drift shift.

    Raises
    ------
    PreconditionViolated
        If the variance degree does not dominate the mean degree.
    """
    _require_dominance(m)
    sums = _WindowSums(m)
    be0, drift0 = _warmup_terms(sums, m, t.n0)
    sup = _window_sup(sums, t, lambda n: sum(_window_terms(sums, n, t.k)))
    return max(be0 + drift0, sup)


def compute_delta1(m, t):
    """Largest drift shift, in standard deviations, over warm-up and windows."""
    _require_dominance(m)
    sums = _WindowSums(m)
    _, drift0 = _warmup_terms(sums, m, t.n0)
    if m.mean.is_zero:
        return drift0
    sup = _window_sup(sums, t, lambda n: _window_terms(sums, n, t.k)[1])
    return max(drift0, sup)


def compute_delta_prime(m, t):
    """Variance-growth slack ``delta'`` for windows of growth ``k``.

    The smallest ``q[ceil(k n')] / (k^M q[n'])`` over the grid, where
    ``q`` is the cumulative variance polynomial and ``M`` its degree,
    capped at 1.  Beyond the evaluated grid, the ratio is bounded below
    by ``(1 - eta) / (1 + eta)`` with ``eta`` the non-leading mass of
    ``q``; the grid is extended until that bound no longer binds.
    """
    if m.deg_var == NEG_INF or m.deg_var < 1:
        raise PreconditionViolated("variance must grow with n")
    sums = _WindowSums(m)
    M = float(m.deg_var) + 1.0
    km = t.k**M
    if sums.integral:
        q = sums._var
        cum = lambda n: float(q(n))
    else:
        cum = lambda n: window_sum_bounds(m.var, 1, n)[0]
        cum_hi = lambda n: window_sum_bounds(m.var, 1, n)[1]
    best = 1.0
    for step, n in enumerate(geometric_grid(t.n0, t.k)):
        hi = math.ceil(t.k * n)
        hi = hi if hi > n else n + 1
        denom = cum(n) if sums.integral else cum_hi(n)
        best = min(best, cum(hi) / (km * denom))
        if sums.integral:
            eta = _lower_mass(sums._var, n)
        else:
            eta = _lower_mass(m.var, n) + 1.0 / max(n, 1)
        tail = (1 - eta) / (1 + eta)
        if step + 1 >= MIN_GRID_STEPS and tail >= best:
            break
        if step + 1 >= MAX_GRID_STEPS:
            best = min(best, tail)
            break
    return max(best, 0.0)


def exponent_only_constants(C1, epsilon, d):
    """The pinned constants used when only the exponent is sought."""
    return ErrorConstants(
        c0=EXPONENT_ONLY_C0,
        delta1=EXPONENT_ONLY_DELTA1,
        delta_prime=EXPONENT_ONLY_DELTA_PRIME,
        C1=C1,
        b=compute_b(epsilon, d, C1),
    )


def error_constants(m, t, mode=CERTIFIED):
    """All constants for a walk and transformation in the given mode."""
    if mode == EXPONENT_ONLY:
        return exponent_only_constants(m.C1, t.epsilon, t.d)
    if mode != CERTIFIED:
        raise DomainError(f"unknown mode {mode!r}")
    return ErrorConstants(
        c0=compute_c0(m, t),
        delta1=compute_delta1(m, t),
        delta_prime=compute_delta_prime(m, t),
        C1=m.C1,
        b=compute_b(t.epsilon, t.d, m.C1),
    )
