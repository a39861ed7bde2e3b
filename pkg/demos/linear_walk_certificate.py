"""
From a certificate to a stopping-time bound
===========================================

A 192-anchor inductive bound for the symmetric linear walk is checked,
then turned into the survival bound ``P(T >= n) <= B n^m`` and an
explicit bound on the expected stopping time.
"""

import json
from pathlib import Path

from pastwalk import bound, search

path = Path(__file__).resolve().parents[1] / "tests" / "data" / "linear_walk_bound.json"
B, P, decimals = bound.load_certificate(json.loads(path.read_text()))
print(f"{B.m} anchors, epsilon={P.epsilon:.6f}, d={P.d:.6f}")

# the table is printed to 8 decimals; the exact check on those digits
# misses by a few 1e-9, and an inductive vector exists within the rounding
print("exact on printed digits:", bound.is_inductive(B, P))
print("inductive within rounding:", bound.verify_certificate(B, P, decimals))

# window growth k from d, then the survival exponent
k = search.k_of(P.d, 1.0, 1)
for n0 in (10**3, 10**6):
    m, Bc = search.survival_bound_of(P.epsilon, k, n0)
    print(f"n0={n0:>8}: k={k:.5f}  m={m:.4f}  B={Bc:.4g}  finite moments={search.finite_moments(m)}")

# the explicit bound sums min(1, B n^m) with a Hurwitz zeta tail
m, Bc = search.survival_bound_of(P.epsilon, k, 10**3)
print("E(T) <=", round(search.explicit_bound_of(m, Bc), 1) if m < -1 else "n/a (m >= -1)")
m, Bc = search.survival_bound_of(P.epsilon, k, 10**6)
print("E(T) <=", f"{search.explicit_bound_of(m, Bc):.4g}")
