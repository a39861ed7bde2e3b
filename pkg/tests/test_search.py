import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pastwalk import bound
from pastwalk.constants import EXPONENT_ONLY
from pastwalk.errors import DomainError
from pastwalk.poly import Polynomial
from pastwalk.search import (
    INCONCLUSIVE,
    INFEASIBLE,
    PAST_PROVEN,
    PRECONDITION_FAILED,
    Fitness,
    Individual,
    SearchConfig,
    evaluate,
    evolve,
    explicit_bound_of,
    finite_moments,
    fitness_of,
    k_of,
    survival_bound_of,
    symmetric_walk,
    verdict_of,
)
from pastwalk.walk import ConditionReport, WalkSpec, check_preconditions, moments

EPS_D, D_D = 0.11286862346080692, 0.410143812649425
TINY = SearchConfig(
    generations=4, population_start=10, population_end=6,
    granularity_start=10, granularity_end=20, mode=EXPONENT_ONLY,
)


def _explicit_oracle(m, B):
    # direct partial sum of min(1, B n^m), then the exact tail from mpmath
    N = 10**6
    n = np.arange(1, N + 1, dtype=float)
    head = math.fsum(np.minimum(1.0, B * n**m))
    return head + B * float(mpmath.zeta(-m, N + 1))


def _formula_oracle(m, B):
    n_star = math.ceil(B ** (-1 / m))
    return n_star + B * float(mpmath.zeta(-m, n_star + 1))


def test_k_of():
    assert k_of(D_D, 1.0, 1) == pytest.approx(1.41014381264942 ** (1 / 3), rel=1e-14)
    assert k_of(D_D, 1.0, 1) == pytest.approx(1.121384, abs=1e-6)
    assert 1.1214**3 - 1 >= D_D
    for k in (1.1, 1.5, 2.0):
        assert k_of(k**3 - 1, 1.0, 1) == pytest.approx(k, rel=1e-14)
    assert k_of(1.0, 0.5, 1) == pytest.approx(4 ** (1 / 3), rel=1e-14)


def test_survival_bound_of():
    m, B = survival_bound_of(EPS_D, 1.1214, 1000)
    base = math.log(1.1214 + 1e-3)
    assert m == pytest.approx(math.log(1 - EPS_D) / base, rel=1e-14)
    assert B == pytest.approx((1 - EPS_D) ** -(math.log(1000) / base + 2), rel=1e-12)
    assert m == pytest.approx(-1.0372, abs=1e-4)
    assert B == pytest.approx(1642.7, abs=0.1)
    m, B = survival_bound_of(1e-12, 1.5, 100)
    assert abs(m) < 1e-11 and B == pytest.approx(1.0)
    m, _ = survival_bound_of(0.3, 1.5, 1)
    assert m == pytest.approx(math.log(0.7) / math.log(2.5))


def test_survival_exponent_monotone():
    eps = np.linspace(0.01, 0.9, 30)
    ms = [survival_bound_of(e, 1.3, 50)[0] for e in eps]
    assert all(x > y for x, y in zip(ms, ms[1:]))
    ks = np.linspace(1.01, 3, 30)
    ms = [survival_bound_of(0.2, k, 50)[0] for k in ks]
    assert all(x < y for x, y in zip(ms, ms[1:]))


def test_explicit_bound_examples():
    assert explicit_bound_of(-2, 1) == pytest.approx(math.pi**2 / 6, rel=1e-12)
    value = explicit_bound_of(-1.04, 1645)
    assert math.ceil(1645 ** (1 / 1.04)) == 1238
    assert value == pytest.approx(_formula_oracle(-1.04, 1645), rel=1e-12)
    assert value == pytest.approx(_explicit_oracle(-1.04, 1645), rel=1e-6)
    assert explicit_bound_of(-1.04, 1700) > value
    with pytest.raises(DomainError):
        explicit_bound_of(-1.0, 10)
    with pytest.raises(DomainError):
        explicit_bound_of(-2.0, 0.5)


@pytest.mark.parametrize("m,B", [(-1.5, 3.0), (-3.2, 80.0), (-1.1, 1.0)])
def test_explicit_bound_dominates_partial_sums(m, B):
    # the crossover term is counted as 1, so the bound exceeds the sum by less than one term
    value = explicit_bound_of(m, B)
    exact = _explicit_oracle(m, B)
    assert exact * (1 - 1e-12) <= value <= exact + 1
    assert value == pytest.approx(_formula_oracle(m, B), rel=1e-12)


@given(st.floats(min_value=-30, max_value=0, allow_nan=False))
def test_finite_moments(m):
    N = finite_moments(m)
    if N == 0:
        assert m >= -1
    else:
        assert m < -N and m >= -(N + 1)


def test_finite_moments_examples():
    assert finite_moments(-1.1189) == 1
    assert finite_moments(-2.0) == 1
    assert finite_moments(-2.5971) == 2
    assert finite_moments(-0.7) == 0


def test_verdicts():
    ok = ConditionReport(True, True, None)
    drift_bad = ConditionReport(True, False, None)
    assert verdict_of(-1.1189, True, ok) == PAST_PROVEN
    assert verdict_of(-0.7436, True, ok) == INCONCLUSIVE
    assert verdict_of(-1.5, False, ok) == INCONCLUSIVE
    assert verdict_of(-1.5, True, drift_bad) == PRECONDITION_FAILED


def test_reference_individual_exponent():
    ind = Individual(D_D, EPS_D, 10**6, 192, 4.98603206, 6.497321214442595)
    ev = evaluate(ind, moments(symmetric_walk(1)), EXPONENT_ONLY)
    assert ev.certificate is not None
    assert bound.is_inductive(ev.certificate, ev.params)
    assert ev.exponent <= -1.04
    assert ev.fitness == Fitness(0.0, ev.exponent)


def test_infeasible_individual():
    ind = Individual(0.01, 0.5, 100, 10, 2.0, 4.0)
    assert fitness_of(ind, moments(symmetric_walk(1)), EXPONENT_ONLY) == INFEASIBLE
    assert fitness_of(ind, moments(symmetric_walk(1))) == INFEASIBLE


def test_fitness_ordering():
    assert Fitness(10.0, -1.2) < Fitness(math.inf, -3.0) < INFEASIBLE
    assert Fitness(0.0, -1.3) < Fitness(0.0, -1.1)


def test_individual_anchors():
    a, c = Individual(0.5, 0.1, 10, 5, 2.0, 3.0).anchors
    assert list(a) == [0.0, 0.5, 1.0, 1.5, 2.0] and list(c) == [3.0]
    with pytest.raises(DomainError):
        Individual(0.5, 0.1, 10, 5, 3.0, 2.0)


def test_config_schedule_and_json():
    cfg = SearchConfig(generations=5)
    assert [cfg.population_at(g) for g in range(5)] == [100, 80, 60, 40, 20]
    assert [cfg.granularity_at(g) for g in range(5)] == [50, 88, 125, 162, 200]
    assert SearchConfig.from_json(cfg.to_json()) == cfg
    assert json.loads(cfg.to_json())["mode"] == "certified"
    with pytest.raises(DomainError):
        SearchConfig(mode="fast")


def test_evolve_is_deterministic():
    w = symmetric_walk(1)
    r1 = evolve(w, config=TINY, seed=3)
    r2 = evolve(w, config=TINY, seed=3)
    assert r1.to_dict() == r2.to_dict()
    assert r1.history == sorted(r1.history, key=lambda h: (h[0], h[1]), reverse=True)


def test_evolve_report_is_verified():
    rep = evolve(symmetric_walk(1), config=TINY, seed=1)
    assert rep.verdict in (PAST_PROVEN, INCONCLUSIVE)
    if rep.certificate is not None:
        assert bound.is_inductive(rep.certificate, rep.bound_params)
    doc = rep.to_dict()
    json.dumps(doc, allow_nan=False)
    assert doc["verdict"] == rep.verdict


def test_evolve_symmetric_in_p():
    a = evolve(symmetric_walk(3, Fraction(9, 10)), config=TINY, seed=2)
    b = evolve(symmetric_walk(3, Fraction(1, 10)), config=TINY, seed=2)
    assert a.exponent == b.exponent


def test_evolve_precondition_failed():
    n = Polynomial.monomial(1)
    rep = evolve(WalkSpec(n, -n + 4 * n, 0.5, 1), config=TINY)
    assert rep.verdict == PRECONDITION_FAILED and rep.certificate is None


def test_symmetric_walk_is_zero_mean():
    for p in (Fraction(1, 2), Fraction(9, 10), Fraction(1, 1000)):
        m = moments(symmetric_walk(2, p))
        assert m.mean.is_zero
        assert check_preconditions(m).ok
