"""Restricted server availability and waiting costs."""
from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple

from ..core import InputError, Number, exact
from ..equilibrium import EquilibriumInterval, _knots, _waiting_bounds, equilibrium_interval, symmetric_cost


def restricted_equilibrium(n: int, beta: Number, gamma: Number, a: Number, b: Number) -> EquilibriumInterval:
    """Equilibria when arrivals are only admitted during [a, b].

    The base interval clipped to [a, b] when they overlap; otherwise the
    window edge closest to it (a if the window lies to the right, b if left).
    """
    a, b = exact(a), exact(b)
    if not a < b:
        raise InputError("availability window needs a < b")
    base = equilibrium_interval(n, beta, gamma)
    lo, hi = max(a, base.lo), min(b, base.hi)
    if lo <= hi:
        return EquilibriumInterval(lo, hi, False, None)
    if a > base.hi:
        return EquilibriumInterval.point(a, notes=("window starts after the base interval",))
    return EquilibriumInterval.point(b, notes=("window ends before the base interval",))


class WaitingResult(NamedTuple):
    interval: EquilibriumInterval
    alpha_bar: Fraction


def max_waiting_rate(n: int, beta: Number, gamma: Number) -> Fraction:
    """Largest waiting rate that still admits a symmetric pure equilibrium.

    min(-gamma*t, beta*(t+n-1)) - c(t;t) is concave piecewise linear with
    kinks at the integers and at the crossing of the two lines, so its maximum
    over t is found among those points; it equals alpha*(n-1)/2 at the limit.
    """
    b, g = exact(beta), exact(gamma)
    te = -(n - 1) * b / (b + g)
    best = max(
        min(-g * t, b * (t + n - 1)) - symmetric_cost(t, n, b, g) for t in _knots(n) + [te]
    )
    return max(best, Fraction(0)) * 2 / (n - 1)


def waiting_cost_interval(n: int, beta: Number, gamma: Number, alpha: Number) -> WaitingResult:
    """Equilibria with an extra cost ``alpha`` per unit of queueing time.

    Joining the crowd costs c(t;t) + alpha*(n-1)/2 on average; the serve-first
    deviation (a moment before t) and serve-last deviation (arrive exactly at
    t+n-1) both avoid waiting entirely.
    """
    alpha = exact(alpha)
    if alpha < 0:
        raise InputError("alpha must be non-negative")
    interval = _waiting_bounds(n, beta, gamma, alpha)
    return WaitingResult(interval, max_waiting_rate(n, beta, gamma))
