"""Socially optimal schedules.

With a common due date and linear penalties the optimum is a no-idle
sequence whose first start is pinned by ``s_tilde = n*beta/(beta+gamma)``.
Heterogeneous customers are handled by exhaustive search over service orders
at desk scale.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .core import (
    DeviationCost,
    InputError,
    Number,
    ProblemSizeError,
    UnsupportedConfiguration,
    exact,
)

MAX_HETEROGENEOUS = 10


@dataclass(frozen=True)
class SocialOptimum:
    s1_lo: Number
    s1_hi: Number
    total_cost: Number
    order: tuple[int, ...] | None = None  # customer served in each slot
    s_tilde: Number | None = None

    @property
    def s1(self) -> Number:
        """Representative first start (midpoint of the optimal set)."""
        return (self.s1_lo + self.s1_hi) / 2

    @property
    def unique(self) -> bool:
        return self.s1_lo == self.s1_hi


def total_cost_of_start(s1: Number, n: int, beta: Number, gamma: Number) -> Fraction:
    """Total deviation cost of the no-idle schedule s1, s1+1, ..., s1+n-1."""
    b, g, s1 = exact(beta), exact(gamma), exact(s1)
    total = Fraction(0)
    for i in range(n):
        s = s1 + i
        total += g * -s if s < 0 else b * s
    return total


def social_optimum_homogeneous(n: int, beta: Number, gamma: Number) -> SocialOptimum:
    if n < 1:
        raise InputError("n must be >= 1")
    b, g = exact(beta), exact(gamma)
    if b <= 0 or g <= 0:
        raise InputError("beta and gamma must be positive")
    s_tilde = n * b / (b + g)
    if s_tilde.denominator == 1:
        lo, hi = -s_tilde, -s_tilde + 1
    else:
        lo = hi = Fraction(-math.floor(s_tilde))
    return SocialOptimum(lo, hi, total_cost_of_start(lo, n, b, g), s_tilde=s_tilde)


# ---------------------------------------------------------------------------
# heterogeneous customers


def _slot_costs(costs: Sequence[DeviationCost], s1: np.ndarray) -> np.ndarray:
    """C[g, i, k] = cost of customer i starting in slot k when slot 0 starts at s1[g]."""
    n = len(costs)
    starts = s1[:, None] + np.arange(n)[None, :]
    return np.stack([c.values(starts) for c in costs], axis=1)


def _best_assignment(C: np.ndarray) -> float:
    rows, cols = linear_sum_assignment(C)
    return float(C[rows, cols].sum())


def _order_cost(costs, order, s1):
    return sum(costs[i](s1 + k) for k, i in enumerate(order))


def _lexicographic_order(C: np.ndarray, target: float, tol: float) -> tuple[int, ...]:
    """Smallest service order (as a sequence of customer ids) within ``tol`` of optimal."""
    n = C.shape[0]
    order: list[int] = []
    free_customers = list(range(n))
    for slot in range(n):
        for i in sorted(free_customers):
            rest = [j for j in free_customers if j != i]
            partial = sum(C[order[k], k] for k in range(slot)) + C[i, slot]
            if rest:
                sub = C[np.ix_(rest, list(range(slot + 1, n)))]
                partial += _best_assignment(sub)
            if partial <= target + tol:
                order.append(i)
                free_customers.remove(i)
                break
        else:  # pragma: no cover - the optimal assignment always fits
            raise RuntimeError("no order reproduces the optimal assignment")
    return tuple(order)


def _check_no_idle(costs, order, s1, tol=1e-9):
    """Reject instances where opening an idle gap would lower total cost."""
    n = len(costs)
    base = _order_cost(costs, order, s1)
    for split in range(1, n):
        for delta in (1e-6, 0.1, 1.0):
            head_earlier = sum(
                costs[i](s1 + k - (delta if k < split else 0)) for k, i in enumerate(order)
            )
            tail_later = sum(
                costs[i](s1 + k + (delta if k >= split else 0)) for k, i in enumerate(order)
            )
            if min(head_earlier, tail_later) < base - tol:
                raise UnsupportedConfiguration(
                    "due dates too spread out: an idle gap lowers total cost, "
                    "so the no-idle program does not describe the optimum"
                )


def social_optimum_heterogeneous(costs: Sequence[DeviationCost], grid_step: float = 1e-3) -> SocialOptimum:
    """Minimise sum_i c_i(s1 + slot_i) over the first start s1 and service orders.

    For each candidate s1 the best order is a linear assignment of customers to
    unit slots.  Candidates are a grid of step ``grid_step`` on
    ``[min d - n, max d + 1]`` plus every breakpoint ``knot - k``; the best
    grid point is polished with a bounded scalar minimiser.  Ties between
    orders go to the lexicographically smallest order.  When every cost is
    piecewise linear the result is re-evaluated exactly on breakpoints and the
    whole optimal interval of s1 is reported.
    """
    costs = list(costs)
    n = len(costs)
    if n == 0:
        raise InputError("need at least one customer")
    if n > MAX_HETEROGENEOUS:
        raise ProblemSizeError(f"n={n} exceeds the exhaustive-search limit {MAX_HETEROGENEOUS}")
    for c in costs:
        c.check_assumption()
    if n == 1:
        return SocialOptimum(costs[0].d, costs[0].d, 0, order=(0,))

    ds = [float(c.d) for c in costs]
    lo, hi = min(ds) - n, max(ds) + 1
    grid = lo + grid_step * np.arange(int(np.ceil((hi - lo) / grid_step)) + 1)
    knot_sets = [c.knots() for c in costs]
    piecewise_linear = all(k is not None for k in knot_sets)
    breaks = sorted({float(x) - k for ks in knot_sets if ks for x in ks for k in range(n)})

    def value(s1: float) -> float:
        return _best_assignment(_slot_costs(costs, np.array([s1]))[0])

    tensor = _slot_costs(costs, grid)
    grid_vals = np.array([_best_assignment(C) for C in tensor])
    j = int(np.argmin(grid_vals))
    best_s, best_v = float(grid[j]), float(grid_vals[j])
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    res = minimize_scalar(value, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    if res.fun < best_v:
        best_s, best_v = float(res.x), float(res.fun)
    for s in breaks:
        v = value(s)
        if v < best_v - 1e-12:
            best_s, best_v = s, v

    C = _slot_costs(costs, np.array([best_s]))[0]
    order = _lexicographic_order(C, best_v, tol=1e-9)

    if piecewise_linear:
        cand = sorted({exact(x) - k for ks in knot_sets for x in ks for k in range(n)})
        vals = {s: _order_cost(costs, order, s) for s in cand}
        vmin = min(vals.values())
        opt = [s for s, v in vals.items() if v <= vmin + 1e-12 * (1 + abs(vmin))]
        s_lo, s_hi, total = min(opt), max(opt), vmin
    else:
        s_lo = s_hi = best_s
        total = _order_cost(costs, order, best_s)
    _check_no_idle(costs, order, (s_lo + s_hi) / 2)
    return SocialOptimum(s_lo, s_hi, total, order=order)
