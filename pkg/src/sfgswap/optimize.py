"""Deterministic multi-start downhill-simplex maximization.

The objectives in this package (CHSH value, key rate) are smooth and low
dimensional but can have several local optima in the measurement angles, so
each search runs Nelder-Mead from a fixed number of seeded starting points
and keeps the best result.  Given the same seed the outcome is reproducible;
ties are broken by the lowest start index.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class OptimizeResult:
    """Best point found over all starts."""

    x: tuple
    value: float
    start_index: int
    n_evaluations: int
    converged: bool


def multistart_maximize(objective, bounds, n_starts: int = 16, seed: int = 0,
                        x0=None, xatol: float = 1e-6, fatol: float = 1e-12,
                        trace: io.TextIOBase = None) -> OptimizeResult:
    """Maximize ``objective`` over box ``bounds`` with multi-start Nelder-Mead.

    Args:
        objective: callable on a parameter vector, returns a finite float.
        bounds: sequence of (low, high) pairs, one per parameter.
        n_starts: number of simplex restarts; start points are drawn from a
            seeded RNG, except the first which is the box center (or ``x0``).
        seed: RNG seed for the start points.
        x0: optional explicit first start.
        xatol: simplex size convergence tolerance.
        trace: optional text stream receiving a CSV trace
            (start, iteration, objective, parameters).

    Returns:
        OptimizeResult with the best point found.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    ndim = len(bounds)
    rng = np.random.default_rng(seed)
    lows = np.array([b[0] for b in bounds])
    highs = np.array([b[1] for b in bounds])

    starts = []
    if x0 is not None:
        starts.append(np.asarray(x0, dtype=float))
    else:
        starts.append(0.5 * (lows + highs))
    while len(starts) < n_starts:
        starts.append(lows + rng.random(ndim) * (highs - lows))

    writer = None
    if trace is not None:
        writer = csv.writer(trace)
        writer.writerow(["start", "iteration", "objective"]
                        + [f"x{i}" for i in range(ndim)])

    def clip(x):
        return np.minimum(np.maximum(x, lows), highs)

    best = None
    total_evals = 0
    any_converged = False
    for s_idx, x_start in enumerate(starts):
        it = [0]

        def neg(x):
            v = objective(clip(x))
            if not np.isfinite(v):
                raise ValueError(f"objective returned non-finite value {v!r}")
            if writer is not None:
                writer.writerow([s_idx, it[0], f"{v:.12g}"]
                                + [f"{xi:.12g}" for xi in clip(x)])
            it[0] += 1
            return -v

        res = minimize(neg, x_start, method="Nelder-Mead",
                       options={"xatol": xatol, "fatol": fatol,
                                "maxiter": 2000 * ndim})
        total_evals += res.nfev
        any_converged = any_converged or bool(res.success)
        x_best = clip(res.x)
        value = -res.fun
        if best is None or value > best.value + 1e-15:
            best = OptimizeResult(x=tuple(float(v) for v in x_best), value=float(value),
                                  start_index=s_idx, n_evaluations=total_evals,
                                  converged=bool(res.success))
    return OptimizeResult(x=best.x, value=best.value, start_index=best.start_index,
                          n_evaluations=total_evals,
                          converged=any_converged)


def prescan_monotone(f, lo: float, hi: float, n: int = 8, increasing: bool = None) -> bool:
    """Coarse monotonicity check of f on [lo, hi] over n sample points."""
    xs = np.linspace(lo, hi, n)
    ys = [f(x) for x in xs]
    inc = all(ys[i + 1] >= ys[i] - 1e-12 for i in range(n - 1))
    dec = all(ys[i + 1] <= ys[i] + 1e-12 for i in range(n - 1))
    if increasing is True:
        return inc
    if increasing is False:
        return dec
    return inc or dec


def bisect_threshold(f, lo: float, hi: float, xtol: float, rtol: float = 0.0):
    """Smallest x in [lo, hi] with f(x) > 0, assuming f is nondecreasing.

    Requires a sign change: f(lo) <= 0 < f(hi).  Returns (x, f(x)).
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0.0:
        raise ValueError("objective already positive at the lower bracket edge")
    if f_hi <= 0.0:
        raise ValueError("no sign change in bracket")
    while (hi - lo) > xtol + rtol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return hi, f(hi)
