"""Genetic search for transformation parameters and the resulting PAST verdict.

An individual fixes the transformation ``(d, epsilon, n0)`` and the anchor
layout ``(g, s, c)``.  Its fitness is the stopping-time bound it
certifies: the explicit ``E(T)`` bound first, then the survival exponent
``m`` of ``P(T >= n) <= B n^m``.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from . import bound
from .constants import (
    CERTIFIED,
    EXPONENT_ONLY,
    MODES,
    TransformParams,
    compute_c0,
    compute_delta1,
    compute_delta_prime,
    exponent_only_constants,
)
from .errors import DomainError, PreconditionViolated
from .poly import Polynomial, _frac
from .special import hurwitz_zeta
from .walk import WalkSpec, check_preconditions, moments

log = logging.getLogger(__name__)

PAST_PROVEN = "PAST-proven"
INCONCLUSIVE = "inconclusive"
PRECONDITION_FAILED = "precondition-failed"

SEARCH_MAX_ITER = 2000
"""Fixed-point iteration cap per fitness evaluation (non-convergence counts as infeasible)."""

N0_MAX = 10**9
K_ROUNDS = 30


@dataclass(frozen=True)
class Individual:
    d: float
    epsilon: float
    n0: int
    g: int
    s: float
    c: float

    def __post_init__(self):
        if not self.d > 0:
            raise DomainError("d must be positive")
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon must lie in (0, 1)")
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise DomainError("n0 must be a positive integer")
        if self.g < 2:
            raise DomainError("need at least two anchors")
        if not 0 < self.s < self.c:
            raise DomainError("need 0 < s < c")

    @property
    def anchors(self):
        """Evenly spaced anchors ``0..s`` and the single tail anchor ``c``."""
        return np.linspace(0.0, self.s, self.g), np.array([self.c])


@dataclass(frozen=True, order=True)
class Fitness:
    """Lexicographically minimized ``(expected_time, exponent)``; exponent 0 means infeasible."""

    expected_time: float
    exponent: float


INFEASIBLE = Fitness(math.inf, 0.0)


@dataclass
class SearchConfig:
    generations: int = 100
    population_start: int = 100
    population_end: int = 20
    granularity_start: int = 50
    granularity_end: int = 200
    mutation_rate: float = 0.3
    elitism_fraction: float = 0.1
    mode: str = CERTIFIED
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.generations < 1:
            raise DomainError("generations must be at least 1")
        if min(self.population_start, self.population_end) < 2:
            raise DomainError("population must be at least 2")
        if min(self.granularity_start, self.granularity_end) < 2:
            raise DomainError("granularity must be at least 2")

    def population_at(self, gen):
        return _schedule(self.population_start, self.population_end, gen, self.generations)

    def granularity_at(self, gen):
        return _schedule(self.granularity_start, self.granularity_end, gen, self.generations)

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, (str, bytes)) else dict(text)
        return cls(**doc)


def _schedule(start, end, gen, total):
    if total <= 1:
        return int(end)
    return int(round(start + (end - start) * gen / (total - 1)))


@dataclass
class Evaluation:
    """Fitness together with everything needed to report it."""

    fitness: Fitness
    individual: Individual
    k: float = math.nan
    B: float = math.nan
    exponent: float = 0.0
    certificate: Optional[bound.BoundSet] = None
    params: Optional[bound.BoundParams] = None
    delta_prime: float = math.nan


@dataclass
class AnalysisReport:
    verdict: str
    exponent: float
    B: float
    k: float
    params: Optional[TransformParams]
    certificate: Optional[bound.BoundSet]
    bound_params: Optional[bound.BoundParams]
    explicit_bound: Optional[float]
    finite_moments: int
    mode: str = CERTIFIED
    generations: int = 0
    individual: Optional[Individual] = None
    d_min: Optional[int] = None
    history: list = field(default_factory=list)

    def to_dict(self):
        doc = {
            "verdict": self.verdict,
            "mode": self.mode,
            "exponent": self.exponent,
            "B": self.B,
            "k": self.k,
            "explicit_bound": self.explicit_bound,
            "finite_moments": self.finite_moments,
            "generations": self.generations,
            "params": asdict(self.params) if self.params else None,
            "individual": asdict(self.individual) if self.individual else None,
            "certificate": None,
            "history": list(self.history),
        }
        if self.d_min is not None:
            doc["d_min_estimate"] = self.d_min
        if self.certificate is not None:
            doc["certificate"] = bound.certificate_dict(self.certificate, self.bound_params)
        return _json_safe(doc)


def _json_safe(obj):
    # JSON has no infinities; encode them as null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


# -- closed-form pieces -------------------------------------------------


def k_of(d, delta_prime, deg_walk):
    """Window growth ``((d + 1) / delta') ** (1 / (2 deg + 1))``."""
    return ((d + 1.0) / delta_prime) ** (1.0 / (2.0 * float(deg_walk) + 1.0))


def survival_bound_of(epsilon, k, n0):
    """``(m, B)`` with ``P(T >= n) <= min(1, B n^m)``.

    ``m = ln(1 - eps) / ln(k + 1/n0)`` and
    ``B = (1 - eps) ** -(log_{k + 1/n0}(n0) + 2)``.
    """
    base = math.log(k + 1.0 / n0)
    m = math.log1p(-epsilon) / base
    B = math.exp(-math.log1p(-epsilon) * (math.log(n0) / base + 2.0))
    return m, B


def explicit_bound_of(m, B):
    """Upper bound on ``E(T) = sum_n P(T >= n)`` from ``min(1, B n^m)``.

    Terms up to ``n* = ceil(B^(-1/m))`` are bounded by 1 and the rest
    summed with the Hurwitz zeta function.

    Raises
    ------
    DomainError
        If ``m >= -1`` (the sum diverges) or ``B < 1``.
    """
    if not m < -1:
        raise DomainError(f"exponent {m} does not give a finite sum")
    if not B >= 1:
        raise DomainError(f"B must be at least 1, got {B}")
    n_star = math.ceil(B ** (-1.0 / m))
    return n_star + B * hurwitz_zeta(-m, n_star + 1)


def finite_moments(m):
    """Largest ``N >= 1`` with ``m < -N``, or 0."""
    if not m < -1:
        return 0
    n = math.ceil(-m) - 1
    return n if m < -n else n - 1


def verdict_of(exponent, certified, conditions):
    """PAST-proven iff preconditions hold, ``m < -1`` and the bound is verified."""
    if not (conditions.variance_dominance and conditions.drift):
        return PRECONDITION_FAILED
    if certified and exponent < -1:
        return PAST_PROVEN
    return INCONCLUSIVE


# -- fitness ------------------------------------------------------------


def _certified_k(m, t, deg):
    """Smallest consistent window growth: ``k`` with ``delta'(k) k^(2D+1) >= 1 + d``."""
    k = k_of(t.d, 1.0, deg)
    for _ in range(K_ROUNDS):
        dp = compute_delta_prime(m, replace(t, k=k))
        if dp <= 0:
            return None, None
        if dp * k ** (2.0 * float(deg) + 1.0) >= (1.0 + t.d) * (1.0 - 1e-15):
            return k, dp
        k = max(k_of(t.d, dp, deg), k * (1.0 + 1e-12))
    return None, None


def evaluate(ind, m, mode=CERTIFIED, max_iter=SEARCH_MAX_ITER):
    """Full fitness evaluation of one individual on walk moments ``m``.

    Raises
    ------
    PreconditionViolated
        If the walk fails the degree conditions.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}")
    cond = check_preconditions(m)
    if not (cond.variance_dominance and cond.drift):
        raise PreconditionViolated("walk fails the degree conditions")
    deg = m.deg_walk
    t0 = TransformParams(ind.n0, 2.0, ind.d, ind.epsilon)
    if mode == EXPONENT_ONLY:
        consts = exponent_only_constants(m.C1, ind.epsilon, ind.d)
        dp = consts.delta_prime
        k = k_of(ind.d, dp, deg)
        c0, delta1 = consts.c0, consts.delta1
    else:
        k, dp = _certified_k(m, t0, deg)
        if k is None:
            return Evaluation(INFEASIBLE, ind)
        t = replace(t0, k=k)
        c0 = compute_c0(m, t)
        # Phi(0) - c0 < eps makes the bound trivially infeasible
        if 0.5 - c0 < ind.epsilon:
            return Evaluation(INFEASIBLE, ind, k=k, delta_prime=dp)
        delta1 = compute_delta1(m, t)
    P = bound.BoundParams.derive(ind.epsilon, ind.d, c0, m.C1, delta1)
    a, c = ind.anchors
    B_set = bound.solve_feasibility(P, a, c, max_iter=max_iter)
    if B_set is None:
        return Evaluation(INFEASIBLE, ind, k=k, params=P, delta_prime=dp)
    expo, B = survival_bound_of(ind.epsilon, k, ind.n0)
    if mode == CERTIFIED and expo < -1:
        et = explicit_bound_of(expo, B)
    elif mode == CERTIFIED:
        et = math.inf
    else:
        et = 0.0
    return Evaluation(Fitness(et, expo), ind, k, B, expo, B_set, P, dp)


def fitness_of(ind, m, mode=CERTIFIED):
    """Fitness tuple ``(E(T) bound, m)``; infeasible individuals get ``(inf, 0)``."""
    return evaluate(ind, m, mode).fitness


# -- genetic operators --------------------------------------------------

_SIGMA = {"d": 0.25, "n0": 0.6, "s": 0.15, "c": 0.15, "epsilon": 0.35}
_DRIFT = 0.1
ANNEAL = 0.8
SPAN_COUPLING = 0.3
"""Anchor span scales as ``d ** -SPAN_COUPLING`` along a d mutation."""


def _rng(seed, *path):
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**63 - 1), *path]))


def _random_individual(rng, g, C1, mode):
    scale = 1.0 / math.sqrt(C1)
    s = float(rng.uniform(2.5, 7.0)) * scale
    lo_n0, hi_n0 = (2.0, 6.0) if mode == CERTIFIED else (2.0, 9.0)
    return Individual(
        d=float(math.exp(rng.uniform(math.log(0.1), math.log(3.0)))),
        epsilon=float(math.exp(rng.uniform(math.log(0.01), math.log(0.4)))),
        n0=int(round(10 ** rng.uniform(lo_n0, hi_n0))),
        g=g,
        s=s,
        c=s * float(1.0 + math.exp(rng.uniform(math.log(0.05), math.log(1.0)))),
    )


def _mutate(ind, rng, rate, exponent, g, scale=1.0):
    """Biased mutation; ``scale`` shrinks every step size as the search settles."""
    d, eps, n0, s, c = ind.d, ind.epsilon, ind.n0, ind.s, ind.c
    sig = {k: v * scale for k, v in _SIGMA.items()}

    def hit():
        return rng.random() < rate

    if hit():
        # move along a line of constant ln(1-eps)/ln(1+d), i.e. constant
        # exponent, and rescale the anchors the way the best span shifts with d
        sd = sig["d"]
        nd = d * math.exp(sd * rng.standard_normal() - _DRIFT * sd)
        eps = -math.expm1(math.log1p(-eps) * math.log1p(nd) / math.log1p(d))
        stretch = (nd / d) ** -SPAN_COUPLING
        s, c = s * stretch, c * stretch
        d = nd
    if hit():
        sd = sig["epsilon"]
        z = math.log(eps / (1.0 - eps)) + sd * rng.standard_normal() + _DRIFT * sd
        eps = 1.0 / (1.0 + math.exp(-z))
    if hit():
        sd = sig["n0"]
        drift = _DRIFT * sd if exponent >= -1 else -_DRIFT * sd
        n0 = int(round(n0 * math.exp(sd * rng.standard_normal() + drift)))
    if hit():
        s *= math.exp(sig["s"] * rng.standard_normal())
    if hit():
        gap = (c - s) * math.exp(sig["c"] * rng.standard_normal())
        c = s + gap
    eps = min(max(eps, 1e-6), 0.95)
    d = min(max(d, 1e-4), 1e4)
    n0 = min(max(n0, 1), N0_MAX)
    if c <= s:
        c = s * 1.01
    return Individual(d, eps, n0, g, s, c)


def _crossover(p1, p2, rng):
    pick = rng.random(5) < 0.5
    fields = ("d", "epsilon", "n0", "s", "c")
    vals = {f: getattr(p1 if k else p2, f) for f, k in zip(fields, pick)}
    if vals["c"] <= vals["s"]:
        vals["c"] = vals["s"] + (p1.c - p1.s)
    return Individual(g=p1.g, **vals)


def _tournament(ranked, rng, size=3):
    idx = rng.integers(0, len(ranked), size=size)
    return ranked[int(idx.min())]


# -- evolution ----------------------------------------------------------

REFINE_STEPS = 8
REFINE_SPAN = 1.25
REFINE_D = True


def _bisect(ev, score, field_name, target):
    """Move one field of a feasible individual toward ``target`` by bisection."""
    best = ev
    ind = ev.individual
    good, bad = getattr(ind, field_name), target
    for _ in range(REFINE_STEPS):
        mid = 0.5 * (good + bad)
        cand = score([replace(ind, **{field_name: mid})])[0]
        if cand.certificate is None:
            bad = mid
            continue
        good = mid
        if cand.fitness < best.fitness:
            best = cand
    return best


def _refine(ev, score):
    """Push an elite toward the feasibility boundary.

    Feasibility is monotone in epsilon and in d, and a larger epsilon or
    a smaller d gives a smaller exponent, so bisection along either axis
    sharpens the search's bias in those directions.  Returns the best
    evaluation seen.
    """
    ind = ev.individual
    ev = _bisect(ev, score, "epsilon", min(0.95, ind.epsilon * REFINE_SPAN))
    if REFINE_D:
        ev = _bisect(ev, score, "d", ev.individual.d / REFINE_SPAN)
    return ev


def _report_from(ev, mode, cond, generations, history):
    verified = ev.certificate is not None and bound.is_inductive(ev.certificate, ev.params)
    expo = ev.exponent if verified else 0.0
    verdict = verdict_of(expo, verified, cond)
    ind = ev.individual
    params = None
    if verified:
        params = TransformParams(ind.n0, ev.k, ind.d, ind.epsilon)
    explicit = None
    if verified and mode == CERTIFIED and expo < -1:
        explicit = ev.fitness.expected_time
    return AnalysisReport(
        verdict=verdict,
        exponent=expo,
        B=ev.B if verified else math.nan,
        k=ev.k if verified else math.nan,
        params=params,
        certificate=ev.certificate if verified else None,
        bound_params=ev.params if verified else None,
        explicit_bound=explicit,
        finite_moments=finite_moments(expo),
        mode=mode,
        generations=generations,
        individual=ind,
        history=history,
    )


def evolve(w, mode=None, config=None, seed=None, workers=None, seed_individuals=()):
    """Genetic search for the best certified stopping-time bound of ``w``.

    Parameters
    ----------
    w : WalkSpec
    mode : str, optional
        ``"certified"`` or ``"exponent-only"``; defaults to ``config.mode``.
    config : SearchConfig, optional
    seed : int, optional
        Overrides ``config.seed``.
    workers : int, optional
        Evaluate each generation in a process pool of this size.  Results
        do not depend on it.
    seed_individuals : iterable of Individual
        Extra starting individuals (anchor counts are reset to the schedule).

    Returns
    -------
    AnalysisReport
        The best individual's report.  Its certificate has been re-checked
        with :func:`bound.is_inductive`.
    """
    config = config or SearchConfig()
    mode = mode or config.mode
    seed = config.seed if seed is None else seed
    m = moments(w)
    cond = check_preconditions(m)
    if not (cond.variance_dominance and cond.drift):
        return AnalysisReport(
            PRECONDITION_FAILED, 0.0, math.nan, math.nan, None, None, None, None, 0,
            mode=mode,
        )

    cache = {}
    pool = None
    if workers and workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        pool = ProcessPoolExecutor(max_workers=workers)

    def score(pop):
        todo = [ind for ind in dict.fromkeys(pop) if ind not in cache]
        if pool is not None and len(todo) > 1:
            results = pool.map(evaluate, todo, [m] * len(todo), [mode] * len(todo))
        else:
            results = (evaluate(ind, m, mode) for ind in todo)
        for ind, ev in zip(todo, results):
            cache[ind] = ev
        return [cache[ind] for ind in pop]

    def rank_key(ev):
        i = ev.individual
        return (ev.fitness, i.d, i.epsilon, i.n0, i.s, i.c, i.g)

    try:
        g0 = config.granularity_at(0)
        rng0 = _rng(seed, 0)
        pop = [replace(ind, g=g0) for ind in seed_individuals]
        while len(pop) < config.population_at(0):
            pop.append(_random_individual(rng0, g0, m.C1, mode))
        best = None
        history = []
        for gen in range(config.generations):
            evs = sorted(score(pop), key=rank_key)
            n_top = max(1, int(math.ceil(config.elitism_fraction * len(evs))))
            top = [_refine(ev, score) if ev.certificate is not None else ev for ev in evs[:n_top]]
            evs = sorted(top + evs[n_top:], key=rank_key)
            if best is None or rank_key(evs[0]) < rank_key(best):
                best = evs[0]
            history.append([best.fitness.expected_time, best.fitness.exponent])
            log.debug("generation %d best %s", gen, best.fitness)
            if gen + 1 == config.generations:
                break
            size = config.population_at(gen + 1)
            g = config.granularity_at(gen + 1)
            n_elite = max(1, int(math.ceil(config.elitism_fraction * size)))
            ranked = [ev.individual for ev in evs]
            nxt = list(dict.fromkeys(ranked[:n_elite]))
            i = 0
            while len(nxt) < size:
                rng = _rng(seed, gen + 1, i)
                i += 1
                p1 = _tournament(ranked, rng)
                p2 = _tournament(ranked, rng)
                child = _crossover(p1, p2, rng)
                expo = cache[p1].fitness.exponent
                scale = 1.0 - ANNEAL * (gen + 1) / max(1, config.generations - 1)
                nxt.append(_mutate(child, rng, config.mutation_rate, expo, g, scale))
            pop = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return _report_from(best, mode, cond, config.generations, history)


def estimate_d_min(p, config=None, seed=0, max_degree=8, mode=EXPONENT_ONLY):
    """Smallest integer degree whose zero-mean walk the search proves PAST.

    An empirical stand-in for the degree threshold: runs :func:`evolve`
    on :func:`symmetric_walk` of degree ``D = 1, 2, ...``.
    Returns ``None`` if no degree up to ``max_degree`` succeeds.
    """
    for deg in range(1, max_degree + 1):
        rep = evolve(symmetric_walk(deg, p), mode=mode, config=config, seed=seed)
        if rep.verdict == PAST_PROVEN:
            return deg
    return None


def symmetric_walk(degree, p=0.5, y0=100):
    """Zero-mean walk ``q1 = n^D / p``, ``q2 = -n^D / (1 - p)``; ``+-n^D`` at ``p = 1/2``."""
    p = _frac(p)
    mono = Polynomial.monomial(degree)
    if p == Fraction(1, 2):
        return WalkSpec(mono, -mono, p, y0)
    return WalkSpec(mono * (1 / p), -mono * (1 / (1 - p)), p, y0)
