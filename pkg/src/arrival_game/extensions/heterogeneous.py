"""Heterogeneous due dates and cost functions.

Everyone arriving together at ``t`` puts each customer in each of the slots
t, t+1, ..., t+n-1 with probability 1/n.  Customer ``i`` keeps the common
arrival time when neither going first (cost c_i(t)) nor going last (cost
c_i(t+n-1)) beats the slot average.  Each customer thus has an interval
tau_i; the equilibria are their intersection, or equivalently the set cut out
by the two ratio conditions in :func:`ratio_bounds`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .._roots import first_nonneg, first_nonneg_pl, last_nonneg, last_nonneg_pl
from ..core import ConsistencyError, DeviationCost, InputError, Number, exact
from ..equilibrium import EquilibriumInterval

AGREEMENT_TOL = 1e-8
_WIDENINGS = 4


@dataclass(frozen=True)
class TauI:
    i: int
    lo: Number
    hi: Number


def _exactify(cost: DeviationCost) -> DeviationCost:
    if cost.kind == "linear":
        return DeviationCost.linear(exact(cost.gamma), exact(cost.beta), exact(cost.d))
    return cost


def _late_gap(c: Callable, n: int) -> Callable:
    # >= 0 iff serving last is no better than the lottery
    return lambda t: c(t + n - 1) - sum(c(t + j) for j in range(n - 1)) / (n - 1)


def _early_gap(c: Callable, n: int) -> Callable:
    # >= 0 iff serving first is no better than the lottery
    return lambda t: c(t) - sum(c(t + j) for j in range(1, n)) / (n - 1)


def _pl_knots(knots: Sequence[Number], n: int, lo: Number, hi: Number) -> list:
    pts = {lo, hi}
    pts.update(x - j for x in knots for j in range(n) if lo < x - j < hi)
    return sorted(pts)


def _solve(g: Callable, knots, n: int, lo, hi, first: bool, tol: float):
    """Boundary of {g >= 0}, widening the bracket while the root sits on its edge."""
    for _ in range(_WIDENINGS + 1):
        if knots is not None:
            grid = _pl_knots(knots, n, lo, hi)
            root = first_nonneg_pl(g, grid) if first else last_nonneg_pl(g, grid)
        else:
            solver = first_nonneg if first else last_nonneg
            root = solver(g, float(lo), float(hi), step=1e-2, xtol=tol)
        on_edge = root is None or (root == lo if first else root == hi)
        if not on_edge:
            return root
        width = hi - lo
        lo, hi = (lo - width, hi) if first else (lo, hi + width)
    raise InputError("no boundary found; check that the cost is unimodal")


def tau_i(cost: DeviationCost, n: int, i: int = 0, tol: float = 1e-12) -> TauI:
    """Common arrival times at which customer ``i`` does not want to deviate.

    ``hi`` solves c(t) = mean of c(t+1..t+n-1); ``lo`` solves
    c(t+n-1) = mean of c(t..t+n-2).  Piecewise-linear costs are solved
    exactly per segment, others by bracketing and Brent's method.
    """
    if n < 2:
        raise InputError("n must be >= 2")
    cost.check_assumption()
    c = _exactify(cost)
    knots = c.knots()
    d = c.d if knots is not None else float(c.d)
    lo_b, hi_b = d - 2 * n, d + 1
    lo = _solve(_late_gap(c, n), knots, n, lo_b, hi_b, first=True, tol=tol)
    hi = _solve(_early_gap(c, n), knots, n, lo_b, hi_b, first=False, tol=tol)
    if lo > hi and knots is None and lo - hi <= 1e-9 * (1 + abs(lo)):
        # the interval is never empty; float roots of a single point can cross
        lo = hi = (lo + hi) / 2
    return TauI(i, lo, hi)


def _ratios(costs: Sequence[DeviationCost], n: int):
    def share(i, t):
        return sum(float(costs[i](t + j)) for j in range(n))

    def early(t):
        return min(float(c(t)) / share(i, t) for i, c in enumerate(costs))

    def late(t):
        return min(float(c(t + n - 1)) / share(i, t) for i, c in enumerate(costs))

    return early, late


def ratio_bounds(costs: Sequence[DeviationCost], tol: float = 1e-13) -> tuple[float | None, float | None]:
    """Equilibrium bounds from the ratio characterisation.

    ``lo`` = inf{t : min_i c_i(t+n-1)/S_i(t) >= 1/n} and
    ``hi`` = sup{t : min_i c_i(t)/S_i(t) >= 1/n}, where S_i(t) is the sum of
    c_i over the n slots.  Solved numerically in floating point.
    """
    n = len(costs)
    early, late = _ratios(costs, n)
    ds = [float(c.d) for c in costs]
    lo_b, hi_b = min(ds) - 2 * n, max(ds) + 1
    lo = _solve(lambda t: late(t) - 1 / n, None, n, lo_b, hi_b, first=True, tol=tol)
    hi = _solve(lambda t: early(t) - 1 / n, None, n, lo_b, hi_b, first=False, tol=tol)
    return lo, hi


def heterogeneous_interval(costs: Sequence[DeviationCost]) -> EquilibriumInterval:
    """Symmetric equilibria for customers with individual cost functions.

    Computed as the intersection of the tau_i and cross-checked against
    :func:`ratio_bounds`; a disagreement beyond 1e-8 raises
    :class:`ConsistencyError`.
    """
    costs = list(costs)
    n = len(costs)
    if n < 2:
        raise InputError("need at least two customers")
    taus = [tau_i(c, n, i) for i, c in enumerate(costs)]
    lo = max(tau.lo for tau in taus)
    hi = min(tau.hi for tau in taus)
    r_lo, r_hi = ratio_bounds(costs)
    for name, a, b in (("lower", lo, r_lo), ("upper", hi, r_hi)):
        if abs(float(a) - b) > AGREEMENT_TOL:
            raise ConsistencyError(f"{name} bound: intersection gives {float(a)!r}, ratios give {b!r}")
    exact_path = all(c.kind == "linear" for c in costs)
    return EquilibriumInterval.from_bounds(lo, hi, tol=0 if exact_path else 1e-9)


def ordered_linear_interval(gammas: Sequence[Number], betas: Sequence[Number]) -> EquilibriumInterval:
    """Equilibria for linear costs with common due date 0 and rates (gamma_i, beta_i).

    After sorting by gamma_i/beta_i the interval is [lo of the last customer,
    hi of the first]; empty when those cross.
    """
    if len(gammas) != len(betas):
        raise InputError("gammas and betas differ in length")
    n = len(gammas)
    if n < 2:
        raise InputError("need at least two customers")
    rates = [(exact(g), exact(b)) for g, b in zip(gammas, betas)]
    if any(g <= 0 or b <= 0 for g, b in rates):
        raise InputError("rates must be positive")
    rates.sort(key=lambda gb: gb[0] / gb[1])
    first = tau_i(DeviationCost.linear(*rates[0]), n, 0)
    last = tau_i(DeviationCost.linear(*rates[-1]), n, n - 1)
    return EquilibriumInterval.from_bounds(last.lo, first.hi)
