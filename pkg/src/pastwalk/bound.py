"""Inductive CDF bound sets for the conditioned summation process.

A bound set claims ``P(S_n <= a_i * sd_n) >= b_i`` for anchors ``a`` and
probabilities ``b``, where ``sd_n`` is the standard deviation of the
running sum.  One step of the process removes the lowest ``epsilon`` of
probability mass and adds an almost-normal increment whose variance is
``d`` times the variance so far.  The bound is inductive when pushing it
through one step gives back probabilities at least as large.

Extra tail anchors ``c`` carry the sub-Gaussian right-tail bound of the
running sum, which caps the mass that can escape above the last anchor.
"""

import json
import logging
import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .constants import compute_b
from .errors import DomainError, IncomparableAnchors
from .special import phi_array

log = logging.getLogger(__name__)

SOLVER_TOL = 1e-12
SOLVER_MAX_ITER = 100_000
NEWTON_EVERY = 8


def _vec(x):
    arr = np.array(x, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BoundSet:
    """Anchors ``a``, probabilities ``b`` and tail anchors ``c``."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, _vec(getattr(self, name)))
        a, b, c = self.a, self.b, self.c
        if len(a) == 0 or len(a) != len(b):
            raise DomainError("a and b must be non-empty and of equal length")
        if len(c) == 0:
            raise DomainError("at least one tail anchor is required")
        if np.any(np.diff(a) <= 0) or np.any(np.diff(c) <= 0):
            raise DomainError("anchors must be strictly ascending")
        if c[0] <= a[-1]:
            raise DomainError("tail anchors must lie above the last anchor")
        if np.any(b < 0) or np.any(b > 1):
            raise DomainError("probabilities must lie in [0, 1]")

    @property
    def m(self):
        return len(self.a)

    def with_b(self, b):
        return BoundSet(self.a, b, self.c)

    def __eq__(self, other):
        if not isinstance(other, BoundSet):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f)) for f in "abc"
        )


@dataclass(frozen=True)
class BoundParams:
    """Process parameters the bound is checked against.

    ``b_const`` is the offset of the preserved sub-Gaussian tail; use
    :meth:`derive` to compute it from the other fields.
    """

    epsilon: float
    d: float
    c0: float
    C1: float
    delta1: float
    b_const: float

    def __post_init__(self):
        vals = (self.epsilon, self.d, self.c0, self.C1, self.delta1, self.b_const)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("bound parameters must be finite")
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.d > 0:
            raise DomainError(f"d must be positive, got {self.d}")

    @classmethod
    def derive(cls, epsilon, d, c0, C1, delta1):
        return cls(epsilon, d, c0, C1, delta1, compute_b(epsilon, d, C1))


def leq(B1, B2):
    """Bound order: ``B1 <= B2`` iff same anchors and ``B1.b >= B2.b``.

    The smaller bound is the stronger claim.

    Raises
    ------
    IncomparableAnchors
        If the anchor vectors differ.
    """
    if not (np.array_equal(B1.a, B2.a) and np.array_equal(B1.c, B2.c)):
        raise IncomparableAnchors("bounds are defined on different anchors")
    return bool(np.all(B1.b >= B2.b))


def tail_values(c, P):
    """Sub-Gaussian bound on ``P(S > c_j * sd)`` for each tail anchor.

    The bound only applies above the offset ``b_const + delta1``; anchors
    at or below it get the trivial value 1.
    """
    z = np.asarray(c, dtype=float) - P.b_const - P.delta1
    return np.where(z > 0, np.exp(P.C1 * (-(z**2) / 2.0)), 1.0)


def _weights(b, tails, eps):
    # the CDF at c_j is at least max(b_m, 1 - t_j); its increments are the
    # masses of the tail pieces
    m = len(b)
    w = np.empty(m + len(tails))
    w[0] = b[0] - eps
    w[1:m] = np.diff(b)
    w[m:] = np.diff(np.maximum(b[-1], 1.0 - tails), prepend=b[-1])
    return np.maximum(w / (1.0 - eps), 0.0)


def tail_weights(B, P):
    """Largest admissible probability mass per interval after conditioning.

    Entry ``j < m`` is the mass between anchors ``a_{j-1}`` and ``a_j``,
    entry ``m`` the mass between ``a_m`` and ``c_1``, and the remaining
    entries the masses between consecutive tail anchors.  Tail pieces
    whose sub-Gaussian bound is already implied by ``b_m`` get no mass,
    so the weights never sum past 1.
    """
    return _weights(B.b, tail_values(B.c, P), P.epsilon)


def _kernel(a, c, P):
    """``max(0, Phi((a_i sqrt(1+d) - x_j) / sqrt(d)) - c0)`` over all anchors ``x``."""
    a = np.asarray(a, dtype=float)
    anchors = np.concatenate([a, np.asarray(c, dtype=float)])
    z = (a[:, None] * math.sqrt(1.0 + P.d) - anchors[None, :]) / math.sqrt(P.d)
    return np.maximum(phi_array(z) - P.c0, 0.0)


def update(B, P):
    """Push a bound through one conditioning-plus-increment step."""
    K = _kernel(B.a, B.c, P)
    new = K @ tail_weights(B, P)
    return B.with_b(np.clip(new, 0.0, 1.0))


def base_cap(a, c0):
    """Largest probabilities the initial almost-normal variable supports."""
    return np.clip(phi_array(a) - c0, 0.0, 1.0)


def is_inductive(B, P):
    """Exact check that ``B`` holds initially and is preserved by a step."""
    if B.a[0] > 0 or B.b[0] < P.epsilon:
        return False
    if np.any(np.diff(B.b) < 0):
        return False
    if np.any(phi_array(B.a) - P.c0 < B.b):
        return False
    return leq(update(B, P), B)


class _Operator:
    """The update as an affine map of ``b`` on fixed anchors."""

    def __init__(self, a, c, P):
        self.a = np.asarray(a, dtype=float)
        self.c = np.asarray(c, dtype=float)
        self.P = P
        self.eps = P.epsilon
        self.K = _kernel(self.a, self.c, P)
        self.tails = tail_values(self.c, P)
        self.cap = base_cap(self.a, P.c0)
        self.m = len(self.a)

    def __call__(self, b):
        return np.clip(self.K @ _weights(b, self.tails, self.eps), 0.0, 1.0)

    def tail_level(self, b):
        """Number of tail pieces whose bound is implied by ``b_m``."""
        return int(np.count_nonzero(1.0 - self.tails <= b[-1]))

    def affine(self, level):
        """``(M, v)`` with ``T(b) = M b + v`` for monotone ``b`` at a tail level."""
        K, m, eps, t = self.K, self.m, self.eps, self.tails
        M = K[:, :m].copy()
        M[:, :-1] -= K[:, 1:m]
        v = -eps * K[:, 0]
        if level < len(t):
            M[:, -1] -= K[:, m + level]
            v = v + (1.0 - t[level]) * K[:, m + level]
            v = v + K[:, m + level + 1 :] @ (-np.diff(t[level:]))
        return M / (1.0 - eps), v / (1.0 - eps)


def _m_matrix_solve(M, rhs):
    """Solve ``(I - M) [x, w] = [rhs, 1]``; ``w > 0`` certifies ``rho(M) < 1``."""
    n = M.shape[0]
    if n == 0:
        return rhs, np.ones(0), True
    A = np.eye(n) - M
    try:
        sol = np.linalg.solve(A, np.column_stack([rhs, np.ones(n)]))
    except np.linalg.LinAlgError:
        return None, None, False
    x, w = sol[:, 0], sol[:, 1]
    ok = bool(np.all(np.isfinite(sol)) and np.all(w > 0))
    return x, w, ok


def _newton(op, b):
    """Policy-iteration step for ``b = min(cap, T(b))`` linearized at ``b``.

    Returns ``(x, w, upper)``: the candidate, the positive M-matrix
    certificate on the active set, and whether ``x`` is provably an
    upper bound on the greatest fixed point.
    """
    level = op.tail_level(b)
    M, v = op.affine(level)
    Tb = M @ b + v
    act = Tb <= op.cap
    cap = op.cap
    x = cap.copy()
    w = np.zeros_like(b)
    rhs = v[act] + M[np.ix_(act, ~act)] @ cap[~act]
    xa, wa, ok = _m_matrix_solve(M[np.ix_(act, act)], rhs)
    if not ok:
        return None, None, False
    x[act] = xa
    w[act] = wa
    # T is convex in b_m once tail pieces drop out, so the linearization
    # only bounds the fixed point from above at level 0
    return x, w, level == 0


def _polish(op, b, margin=1e-14):
    """Nudge a near-fixed point down into the exactly inductive region.

    With ``r`` the largest shortfall ``b - T(b)`` on the near-active
    entries and ``w`` solving ``(I - M) w = 1`` there, ``b - (r + margin) w``
    satisfies ``T(b') >= b'`` whenever the affine model is exact.
    """
    P = op.P
    b = np.maximum.accumulate(np.clip(np.minimum(b, op.cap), 0.0, 1.0))
    if b[0] < P.epsilon:
        return None
    M, v = op.affine(op.tail_level(b))
    gap = M @ b + v - b
    act = gap < 1e-7
    if not act.any():
        return b if is_inductive(BoundSet(op.a, b, op.c), P) else None
    r = max(0.0, float(-gap[act].min()))
    _, wa, ok = _m_matrix_solve(M[np.ix_(act, act)], np.zeros(int(act.sum())))
    if not ok:
        return None
    w = np.zeros_like(b)
    w[act] = wa
    B = BoundSet(op.a, np.clip(b, 0.0, 1.0), op.c)
    for _ in range(6):
        cand = np.maximum.accumulate(np.clip(b - (r + margin) * w, 0.0, 1.0))
        if cand[0] < P.epsilon:
            return None
        B = B.with_b(cand)
        if is_inductive(B, P):
            return cand
        margin *= 10.0
    return None


@dataclass
class SolveInfo:
    status: str  # "feasible", "infeasible" or "nonconvergence"
    iterations: int
    b: np.ndarray


def greatest_fixed_point(P, anchors_a, anchors_c, tol=SOLVER_TOL, max_iter=SOLVER_MAX_ITER):
    """Run the monotone iteration ``b <- min(b, T(b))`` from the base cap.

    Every iterate dominates every feasible ``b``, so ``b_1 < epsilon`` at
    any point proves infeasibility.  Newton steps on the active set
    accelerate convergence; a feasible answer is only returned after
    :func:`is_inductive` accepts it.
    """
    op = _Operator(anchors_a, anchors_c, P)
    eps = P.epsilon
    b = op.cap.copy()
    for it in range(1, max_iter + 1):
        if b[0] < eps:
            return SolveInfo("infeasible", it, b)
        nb = np.minimum(b, op(b))
        if nb[0] < eps:
            return SolveInfo("infeasible", it, nb)
        if it % NEWTON_EVERY == 1:
            x, _, upper = _newton(op, nb)
            if x is not None and np.all(x <= nb + 1e-12):
                if upper and x[0] < eps - 1e-12:
                    return SolveInfo("infeasible", it, x)
                cand = _polish(op, x)
                if cand is not None:
                    return SolveInfo("feasible", it, cand)
                if upper:
                    nb = np.minimum(nb, np.maximum(x, 0.0))
        if np.max(np.abs(nb - b)) < tol:
            cand = _polish(op, nb)
            if cand is not None:
                return SolveInfo("feasible", it, cand)
            return SolveInfo("nonconvergence", it, nb)
        b = nb
    return SolveInfo("nonconvergence", max_iter, b)


def solve_feasibility(P, anchors_a, anchors_c, tol=SOLVER_TOL, max_iter=SOLVER_MAX_ITER):
    """Find an inductive bound on the given anchors, or ``None`` if there is none.

    Hitting the iteration cap is reported as ``None`` as well (the
    conservative reading).
    """
    a = np.asarray(anchors_a, dtype=float)
    if a[0] > 0:
        return None
    info = greatest_fixed_point(P, a, anchors_c, tol=tol, max_iter=max_iter)
    if info.status == "nonconvergence":
        log.info("fixed-point iteration did not converge after %d steps", info.iterations)
    if info.status != "feasible":
        return None
    return BoundSet(a, info.b, anchors_c)


def grid_oracle(P, anchors_a, anchors_c, resolution):
    """Brute-force feasibility over a uniform probability grid.

    Enumerates every nondecreasing ``b`` with entries in
    ``{eps + (1 - eps) i / resolution}`` and checks all constraints
    directly.  Only meant for at most three anchors.
    """
    a = np.asarray(anchors_a, dtype=float)
    m = len(a)
    if m > 3:
        raise DomainError("grid_oracle supports at most 3 anchors")
    if a[0] > 0:
        return False
    eps = P.epsilon
    levels = eps + (1.0 - eps) * np.arange(resolution + 1) / resolution
    cap = phi_array(a) - P.c0
    K = _kernel(a, anchors_c, P)
    tails = tail_values(anchors_c, P)
    for head in combinations_with_replacement(range(resolution + 1), m - 1):
        head_vals = levels[list(head)]
        if m > 1 and np.any(head_vals > cap[:-1]):
            continue
        start = head[-1] if head else 0
        last = levels[start:]
        last = last[last <= cap[-1]]
        if len(last) == 0:
            continue
        bs = np.column_stack([np.broadcast_to(head_vals, (len(last), m - 1)), last])
        w = np.empty((len(bs), m + len(tails)))
        w[:, 0] = bs[:, 0] - eps
        w[:, 1:m] = np.diff(bs, axis=1)
        cdf = np.maximum(bs[:, -1:], 1.0 - tails[None, :])
        w[:, m] = cdf[:, 0] - bs[:, -1]
        w[:, m + 1 :] = np.diff(cdf, axis=1)
        w = np.maximum(w / (1.0 - eps), 0.0)
        new = np.clip(w @ K.T, 0.0, 1.0)
        if np.any(np.all(new >= bs, axis=1)):
            return True
    return False


# -- certificates -------------------------------------------------------


def certificate_dict(B, P, decimals=None):
    """JSON-ready certificate; ``decimals`` records rounding of reference ``b``."""
    doc = {
        "epsilon": P.epsilon,
        "d": P.d,
        "c0": P.c0,
        "C1": P.C1,
        "delta1": P.delta1,
        "b_const": P.b_const,
        "a": [float(x) for x in B.a],
        "b": [float(x) for x in B.b],
        "c": [float(x) for x in B.c],
    }
    if decimals is not None:
        doc["decimals"] = int(decimals)
    return doc


def dumps_certificate(B, P, decimals=None):
    # repr-based float output round-trips every binary64 value exactly
    return json.dumps(certificate_dict(B, P, decimals), indent=1)


def load_certificate(doc):
    """Parse a certificate mapping (or JSON text) into ``(B, P, decimals)``.

    A missing ``b_const`` is derived from the other parameters.
    """
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if "b_const" in doc:
        P = BoundParams(
            float(doc["epsilon"]), float(doc["d"]), float(doc["c0"]),
            float(doc["C1"]), float(doc["delta1"]), float(doc["b_const"]),
        )
    else:
        P = BoundParams.derive(
            float(doc["epsilon"]), float(doc["d"]), float(doc["c0"]),
            float(doc["C1"]), float(doc["delta1"]),
        )
    B = BoundSet(doc["a"], doc["b"], doc["c"])
    return B, P, doc.get("decimals")


def rounded_witness(B, P, decimals, max_iter=SOLVER_MAX_ITER):
    """An exactly inductive bound within rounding distance of ``B.b``.

    A table printed to ``decimals`` places stands for some unrounded
    vector within ``0.5 * 10**-decimals`` of it.  Iterating downward
    from the top of that box finds the largest inductive vector below
    it; the witness is accepted only if it stays inside the box.
    Returns the witness bound or ``None``.
    """
    radius = 0.5 * 10.0 ** (-decimals)
    op = _Operator(B.a, B.c, P)
    top = np.minimum(B.b + radius, op.cap)
    b = top.copy()
    for _ in range(max_iter):
        nb = np.minimum(b, op(b))
        if nb[0] < P.epsilon or np.any(nb < B.b - radius):
            return None
        if np.max(np.abs(nb - b)) < 1e-15:
            break
        b = nb
    cand = _polish(op, nb)
    if cand is None or np.any(np.abs(cand - B.b) > radius):
        return None
    W = B.with_b(cand)
    return W if is_inductive(W, P) else None


def verify_certificate(B, P, decimals=None):
    """Accept ``B`` if it is inductive, or within its declared rounding of one."""
    if is_inductive(B, P):
        return True
    if decimals is None:
        return False
    return rounded_witness(B, P, decimals) is not None
