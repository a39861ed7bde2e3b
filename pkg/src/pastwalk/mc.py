"""Monte-Carlo simulation of polynomial random walks.

Each path draws its branch choices from a counter-based hash of
``(seed, path, step)``, so a path's trajectory does not depend on how
paths are batched.  Paths are advanced in blocks: a block of steps is
generated for every surviving path at once and scanned with a
cumulative sum.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import stats

from .errors import InsufficientTail

BLOCK_ELEMENTS = 1 << 22
GRID_RATIO = 1.1
MIN_TAIL_POINTS = 10
MIN_SURVIVORS = 20
CENSOR_BIAS = 0.01

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    # splitmix64 finalizer; uint64 arithmetic wraps
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def path_keys(seed, paths):
    """Per-path 64-bit keys derived from the master seed."""
    with np.errstate(over="ignore"):
        base = _mix(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64) + _GOLDEN)
        return _mix(base + np.asarray(paths, dtype=np.uint64) * _GOLDEN)


def uniforms(keys, steps):
    """Uniform ``[0, 1)`` draws for every (path key, step) pair."""
    with np.errstate(over="ignore"):
        z = _mix(keys[:, None] + np.asarray(steps, dtype=np.uint64)[None, :] * _GOLDEN)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def survival_grid(cap, ratio=GRID_RATIO):
    """Distinct values ``ceil(ratio**j)`` up to ``cap``."""
    top = int(math.ceil(math.log(cap) / math.log(ratio))) + 1 if cap > 1 else 1
    grid = np.unique(np.ceil(ratio ** np.arange(top + 1) - 1e-9).astype(np.int64))
    return grid[grid <= cap]


@dataclass
class SimResult:
    """Summary of a simulation run.

    ``survival`` rows are ``(n, P(T >= n), stderr)``.  The mean and
    quantiles of ``T`` are over uncensored paths only; ``censored``
    counts paths still running at ``cap``.
    """

    samples: int
    cap: int
    seed: int
    censored: int
    mean: float
    variance: float
    quantiles: dict
    survival: np.ndarray
    times: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def censored_fraction(self):
        return self.censored / self.samples

    @property
    def mean_stderr(self):
        done = self.samples - self.censored
        return math.sqrt(self.variance / done) if done > 1 else math.nan

    def to_dict(self):
        return {
            "samples": self.samples,
            "cap": self.cap,
            "seed": self.seed,
            "censored": self.censored,
            "censored_fraction": self.censored_fraction,
            "stop_times": {
                "mean": _finite(self.mean),
                "variance": _finite(self.variance),
                "mean_stderr": _finite(self.mean_stderr),
                "quantiles": {k: _finite(v) for k, v in self.quantiles.items()},
            },
            "survival": [[int(n), float(s), float(e)] for n, s, e in self.survival],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def survival_csv(self):
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["n", "survival", "stderr"])
        for n, s, e in self.survival:
            out.writerow([int(n), repr(float(s)), repr(float(e))])
        return buf.getvalue()


def _finite(x):
    return x if math.isfinite(x) else None


def _branch_values(q, steps):
    n = steps.astype(np.float64)
    out = np.zeros_like(n)
    for e, c in q.terms:
        out += float(c) * n ** float(e)
    return out


def simulate(w, samples, cap, seed=0, complement=False):
    """Run ``samples`` independent paths of walk ``w`` for at most ``cap`` steps.

    Parameters
    ----------
    w : WalkSpec
    samples, cap : int
    seed : int
    complement : bool
        Use ``1 - u`` for every branch draw.  Simulating ``w.swapped()``
        with ``complement=True`` reproduces the paths of ``w`` exactly.

    Returns
    -------
    SimResult
    """
    if samples < 1 or cap < 1:
        raise ValueError("samples and cap must be positive")
    p = float(w.p)
    y0 = float(w.y0)
    keys = path_keys(seed, np.arange(samples))
    times = np.zeros(samples, dtype=np.int64)
    y = np.full(samples, y0)
    alive = np.arange(samples)
    n = 1
    while alive.size and n <= cap:
        length = int(min(cap - n + 1, max(1, BLOCK_ELEMENTS // alive.size)))
        steps = np.arange(n, n + length, dtype=np.int64)
        u = uniforms(keys[alive], steps)
        if complement:
            u = 1.0 - u
        inc = np.where(u < p, _branch_values(w.q1, steps), _branch_values(w.q2, steps))
        path = y[alive, None] + np.cumsum(inc, axis=1)
        hit = path <= 0
        done = hit.any(axis=1)
        times[alive[done]] = n + np.argmax(hit[done], axis=1)
        y[alive[~done]] = path[~done, -1]
        alive = alive[~done]
        n += length
    censored = alive.size
    times[alive] = cap + 1

    grid = survival_grid(cap)
    ordered = np.sort(times)
    at_least = samples - np.searchsorted(ordered, grid, side="left")
    surv = at_least / samples
    err = np.sqrt(surv * (1.0 - surv) / samples)
    table = np.column_stack([grid, surv, err])

    finished = times[times <= cap].astype(np.float64)
    if finished.size:
        mean = float(finished.mean())
        var = float(finished.var(ddof=1)) if finished.size > 1 else 0.0
        qs = np.quantile(finished, [0.5, 0.9, 0.99])
        quantiles = {"0.5": float(qs[0]), "0.9": float(qs[1]), "0.99": float(qs[2])}
    else:
        mean = var = math.nan
        quantiles = {"0.5": math.nan, "0.9": math.nan, "0.99": math.nan}
    return SimResult(samples, cap, seed, censored, mean, var, quantiles, table, times)


def fit_exponent(r, tail_fraction=0.5, min_survivors=MIN_SURVIVORS):
    """Theil-Sen slope of ``ln P(T >= n)`` against ``ln n`` in the tail.

    Usable points have at least ``min_survivors`` surviving paths, lie
    below the final decade before the cap, and have a censoring share
    under 1%.  The fit uses the top ``tail_fraction`` of their log-n
    range.

    Returns
    -------
    (slope, intercept)

    Raises
    ------
    InsufficientTail
        If fewer than 10 points remain.
    """
    n, surv = r.survival[:, 0], r.survival[:, 1]
    count = surv * r.samples
    ok = (count >= min_survivors) & (n <= r.cap / 10.0) & (n > 1)
    if r.censored:
        ok &= r.censored <= CENSOR_BIAS * count
    n, surv = n[ok], surv[ok]
    if n.size:
        lo, hi = math.log(n.min()), math.log(n.max())
        keep = np.log(n) >= hi - tail_fraction * (hi - lo)
        n, surv = n[keep], surv[keep]
    if n.size < MIN_TAIL_POINTS:
        raise InsufficientTail(f"only {n.size} usable tail points")
    res = stats.theilslopes(np.log(surv), np.log(n))
    return float(res[0]), float(res[1])


def fit_power_law(n, surv):
    """Theil-Sen slope and intercept of ``ln surv`` on ``ln n`` (no filtering)."""
    n, surv = np.asarray(n, float), np.asarray(surv, float)
    if n.size < MIN_TAIL_POINTS or np.any(surv <= 0):
        raise InsufficientTail("need at least 10 positive points")
    res = stats.theilslopes(np.log(surv), np.log(n))
    return float(res[0]), float(res[1])
