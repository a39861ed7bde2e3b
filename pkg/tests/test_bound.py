import json
import math

import numpy as np
import pytest

from pastwalk.bound import (
    BoundParams,
    BoundSet,
    certificate_dict,
    dumps_certificate,
    grid_oracle,
    is_inductive,
    leq,
    load_certificate,
    rounded_witness,
    solve_feasibility,
    tail_values,
    tail_weights,
    update,
    verify_certificate,
)
from pastwalk.errors import DomainError, IncomparableAnchors
from pastwalk.special import phi

SMALL = BoundParams.derive(0.1, 3.0, 1e-3, 1.0, 0.0)
SMALL_B = BoundSet([0.0, 1.0], [0.1, 0.4], [3.0])


def random_instance(rng, max_m=3):
    m = int(rng.integers(1, max_m + 1))
    a = [-rng.uniform(0, 0.6)]
    for _ in range(m - 1):
        a.append(a[-1] + rng.uniform(0.3, 1.5))
    c = [a[-1] + rng.uniform(0.8, 3.5)]
    P = BoundParams.derive(rng.uniform(0.01, 0.25), rng.uniform(0.5, 6), 1e-3, 1.0, 0.0)
    return P, np.array(a), np.array(c)


def random_bound(rng, a, c, eps):
    b = np.sort(rng.uniform(eps, 1.0, len(a)))
    return BoundSet(a, b, c)


def test_small_example_update():
    new = update(SMALL_B, SMALL)
    assert new.b[0] == pytest.approx(0.1188, abs=5e-4)
    assert new.b[1] == pytest.approx(0.4138, abs=5e-4)
    assert leq(new, SMALL_B)
    assert is_inductive(SMALL_B, SMALL)


def test_small_example_hand_computation():
    # one increment of variance 3 on anchors (0, 1): the two-interval sum by hand
    w = [0.0, 0.3 / 0.9, (1 - math.exp(-(3 - SMALL.b_const) ** 2 / 2) - 0.4) / 0.9]
    anchors = [0.0, 1.0, 3.0]
    for i, a in enumerate([0.0, 1.0]):
        expect = sum(wj * max(0.0, phi((2 * a - x) / math.sqrt(3)) - 1e-3) for wj, x in zip(w, anchors))
        assert update(SMALL_B, SMALL).b[i] == pytest.approx(expect, rel=1e-13)


def test_small_example_tail_weights():
    tail = tail_values([3.0], SMALL)[0]
    assert 3.0 - SMALL.b_const == pytest.approx(2.541, abs=1e-3)
    assert tail <= 0.04
    w = tail_weights(SMALL_B, SMALL)
    assert w[0] == 0.0
    assert w[1] == pytest.approx(1 / 3, rel=1e-12)
    assert w[2] >= (0.96 - 0.4) / 0.9
    assert w[2] == pytest.approx(0.6227, abs=1e-4)


def test_flat_bound_has_zero_interior_weights():
    B = BoundSet([-0.5, 0.0, 0.5], [0.1, 0.1, 0.1], [2.0])
    w = tail_weights(B, SMALL)
    assert np.all(w[:3] == 0)


def test_tail_values_below_offset_are_trivial():
    assert tail_values([SMALL.b_const - 0.1], SMALL)[0] == 1.0


def test_weights_are_a_sub_probability():
    rng = np.random.default_rng(1)
    for _ in range(50):
        P, a, c = random_instance(rng)
        c = np.concatenate([c, c[-1] + np.cumsum(rng.uniform(0.2, 1, 3))])
        B = random_bound(rng, a, c, P.epsilon)
        w = tail_weights(B, P)
        assert np.all(w >= 0)
        assert w.sum() <= 1 + 1e-12


def test_leq():
    assert leq(SMALL_B, SMALL_B)
    up = SMALL_B.with_b(np.minimum(SMALL_B.b + 0.01, 1.0))
    assert leq(up, SMALL_B) and not leq(SMALL_B, up)
    with pytest.raises(IncomparableAnchors):
        leq(SMALL_B, BoundSet([0.0, 1.5], [0.1, 0.4], [3.0]))


def test_boundset_validation():
    with pytest.raises(DomainError):
        BoundSet([1.0, 0.0], [0.1, 0.2], [3.0])
    with pytest.raises(DomainError):
        BoundSet([0.0], [1.2], [3.0])
    with pytest.raises(DomainError):
        BoundSet([0.0, 4.0], [0.1, 0.2], [3.0])
    with pytest.raises(DomainError):
        BoundSet([0.0], [0.1, 0.2], [3.0])
    B = BoundSet([0.0], [0.5], [3.0])
    with pytest.raises(ValueError):
        B.b[0] = 0.2


def test_huge_c0_wipes_update():
    P = BoundParams.derive(0.1, 3.0, 1.0, 1.0, 0.0)
    assert np.all(update(SMALL_B, P).b == 0)


def test_update_monotone_over_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(200):
        P, a, c = random_instance(rng)
        B1 = random_bound(rng, a, c, P.epsilon)
        raised = np.maximum.accumulate(np.minimum(B1.b + rng.uniform(0, 0.2, len(a)), 1.0))
        B2 = B1.with_b(raised)
        assert leq(B2, B1)
        assert leq(update(B2, P), update(B1, P))
        assert np.all(np.diff(update(B1, P).b) >= -1e-15)


def test_raising_one_entry_raises_every_output():
    rng = np.random.default_rng(8)
    for _ in range(100):
        P, a, c = random_instance(rng)
        B = random_bound(rng, a, c, P.epsilon)
        i = int(rng.integers(len(a)))
        top = B.b[i + 1] if i + 1 < len(a) else 1.0
        b = B.b.copy()
        b[i] = rng.uniform(b[i], top)
        assert np.all(update(B.with_b(b), P).b >= update(B, P).b - 1e-15)


def test_inductivity_closed_under_update():
    rng = np.random.default_rng(9)
    found = 0
    while found < 20:
        P, a, c = random_instance(rng)
        B = solve_feasibility(P, a, c)
        if B is None:
            continue
        found += 1
        assert is_inductive(B, P)
        assert is_inductive(update(B, P), P)


def test_certificate_from_reference_table(linear_bound_doc):
    B, P, decimals = load_certificate(linear_bound_doc)
    assert B.m == 192 and decimals == 8
    assert P.b_const == pytest.approx(2.610271778173943, rel=1e-14)
    # the printed table is rounded to 8 places; it is inductive up to that rounding
    assert verify_certificate(B, P, decimals)
    W = rounded_witness(B, P, decimals)
    assert W is not None and is_inductive(W, P)
    assert np.max(np.abs(W.b - B.b)) <= 0.5e-8


def test_reference_parameters_solve(linear_bound_doc):
    B, P, _ = load_certificate(linear_bound_doc)
    S = solve_feasibility(P, B.a, B.c)
    assert S is not None and is_inductive(S, P)


def test_reference_table_fails_with_larger_epsilon(linear_bound_doc):
    doc = dict(linear_bound_doc, epsilon=0.20)
    doc.pop("b_const", None)
    B, P, decimals = load_certificate(doc)
    assert not is_inductive(B, P)
    assert not verify_certificate(B, P, decimals)
    assert solve_feasibility(P, B.a, B.c) is None


def test_half_mass_removal_is_infeasible():
    P = BoundParams.derive(0.5, 0.01, 1e-3, 1.0, 0.0)
    a, c = [-0.3, 0.4, 1.2], [3.0]
    assert solve_feasibility(P, a, c) is None
    assert not grid_oracle(P, a, c, 200)


def test_small_example_oracle_and_solver():
    a, c = SMALL_B.a, SMALL_B.c
    assert grid_oracle(SMALL, a, c, 100)
    S = solve_feasibility(SMALL, a, c)
    assert S is not None and is_inductive(S, SMALL)
    # greatest fixed point dominates the hand-made witness
    assert leq(S, SMALL_B)


def test_tiny_epsilon_is_feasible():
    for eps in (1e-2, 1e-4, 1e-8):
        P = BoundParams.derive(eps, 3.0, 1e-3, 1.0, 0.0)
        assert solve_feasibility(P, SMALL_B.a, SMALL_B.c) is not None


def test_solver_agrees_with_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        P, a, c = random_instance(rng, max_m=2)
        S = solve_feasibility(P, a, c)
        if grid_oracle(P, a, c, 400):
            assert S is not None
        if S is None:
            assert not grid_oracle(P, a, c, 1600)
        else:
            assert is_inductive(S, P)


def test_feasibility_monotone_in_epsilon():
    rng = np.random.default_rng(11)
    for _ in range(15):
        P, a, c = random_instance(rng)
        seen_infeasible = False
        for eps in np.linspace(0.01, 0.4, 9):
            Q = BoundParams.derive(eps, P.d, P.c0, P.C1, P.delta1)
            ok = solve_feasibility(Q, a, c) is not None
            assert not (ok and seen_infeasible)
            seen_infeasible |= not ok


def test_certificate_round_trip():
    S = solve_feasibility(SMALL, SMALL_B.a, SMALL_B.c)
    text = dumps_certificate(S, SMALL)
    B, P, decimals = load_certificate(text)
    assert B == S and P == SMALL and decimals is None
    assert is_inductive(B, P)
    doc = certificate_dict(S, SMALL, decimals=6)
    assert set(doc) == {"epsilon", "d", "c0", "C1", "delta1", "b_const", "a", "b", "c", "decimals"}
    assert json.loads(json.dumps(doc))["b"] == list(S.b)
