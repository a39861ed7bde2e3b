"""
One step of an inductive bound
==============================

A bound set says ``P(S_n <= a_i sd) >= b_i`` for a few anchors.  One
step of the process cuts away the lowest ``epsilon`` of the mass and
adds an almost-normal increment with ``d`` times the variance so far.
Pushing the bound through that step and getting something at least as
strong back means it holds forever.
"""

import math

import numpy as np

from pastwalk import bound

# anchors at 0 and 1 standard deviations, one tail anchor at 3
P = bound.BoundParams.derive(epsilon=0.1, d=3.0, c0=1e-3, C1=1.0, delta1=0.0)
B = bound.BoundSet(a=[0.0, 1.0], b=[0.1, 0.4], c=[3.0])
print("tail offset b_const =", round(P.b_const, 5))

# the sub-Gaussian tail caps the mass above the tail anchor
tail = bound.tail_values(B.c, P)[0]
z = 3.0 - P.b_const
print("P(S > 3 sd) <=", round(tail, 5), " exp(-z^2/2) =", round(math.exp(-z * z / 2), 5))

# mass per interval after conditioning, then the pushed-forward bound
print("interval masses:", np.round(bound.tail_weights(B, P), 4))
new = bound.update(B, P)
print("updated b:", np.round(new.b, 4), " original b:", B.b)
print("inductive:", bound.is_inductive(B, P))

# the solver finds the greatest inductive bound on the same anchors
S = bound.solve_feasibility(P, B.a, B.c)
print("greatest inductive b:", np.round(S.b, 4))

# conditioning away half the mass while the variance barely grows cannot work
Q = bound.BoundParams.derive(epsilon=0.5, d=0.01, c0=1e-3, C1=1.0, delta1=0.0)
print("epsilon 0.5, d 0.01 feasible:", bound.solve_feasibility(Q, B.a, B.c) is not None)
