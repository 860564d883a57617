"""Symmetric equilibria of the base arrival game.

All customers share due date 0 and linear penalties (gamma early, beta late),
service takes one time unit.  When everyone arrives at ``t`` the lottery puts
a customer in each of the slots t, t+1, ..., t+n-1 with probability 1/n; a
deviator can instead be served first (arrive a moment before ``t``) or last
(arrive in ``(t, t+n-1]``).  Every quantity here is piecewise linear in ``t``
with integer breakpoints, so interval endpoints are solved exactly in
rational arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from ._roots import first_nonneg_pl, last_nonneg_pl
from .core import InputError, Number, exact
from .social import social_optimum_homogeneous, total_cost_of_start


@dataclass(frozen=True)
class EquilibriumInterval:
    """Closed interval [lo, hi] of symmetric pure equilibrium arrival times.

    When ``empty`` is set, ``lo``/``hi`` still carry whatever boundary values
    were found (``lo > hi`` or ``None``) so callers can report them.
    ``witness`` is a known equilibrium (for the base model the time that
    equalises the serve-first and serve-last deviations).
    """

    lo: Number | None
    hi: Number | None
    empty: bool = False
    witness: Number | None = None
    notes: tuple[str, ...] = field(default=())

    @classmethod
    def point(cls, t: Number, **kwargs) -> "EquilibriumInterval":
        return cls(t, t, False, kwargs.pop("witness", t), **kwargs)

    @classmethod
    def from_bounds(cls, lo, hi, witness=None, notes=(), tol=0) -> "EquilibriumInterval":
        if lo is None or hi is None:
            return cls(lo, hi, True, None, tuple(notes))
        if lo > hi:
            if lo - hi > tol:
                return cls(lo, hi, True, None, tuple(notes))
            mid = (lo + hi) / 2
            return cls(mid, mid, False, witness, tuple(notes) + ("endpoints merged within solver tolerance",))
        return cls(lo, hi, False, witness, tuple(notes))

    @property
    def is_point(self) -> bool:
        return not self.empty and self.lo == self.hi

    @property
    def midpoint(self) -> Number | None:
        return None if self.empty else (self.lo + self.hi) / 2

    def contains(self, t: Number, tol: float = 0.0) -> bool:
        return not self.empty and self.lo - tol <= t <= self.hi + tol


def _dev(t: Fraction, beta: Fraction, gamma: Fraction) -> Fraction:
    return gamma * -t if t < 0 else beta * t


def symmetric_cost(t: Number, n: int, beta: Number, gamma: Number) -> Fraction:
    """Expected cost of each customer when all ``n`` arrive together at ``t``."""
    if n < 1:
        raise InputError("n must be >= 1")
    t, b, g = exact(t), exact(beta), exact(gamma)
    return sum((_dev(t + i, b, g) for i in range(n)), Fraction(0)) / n


def deviation_cost_landscape(s: Number, t: Number, n: int, beta: Number, gamma: Number) -> Fraction:
    """Cost of arriving at ``s`` when the other n-1 customers all arrive at ``t``.

    Before ``t`` the deviator is served first at ``s``; after ``t`` it starts at
    ``max(s, t+n-1)``.  In the usual region (s < 0 on the early
    branch, t+n-1 >= 0 on the late one) this is -gamma*s and
    beta*max(t+n-1, s).
    """
    s, t, b, g = exact(s), exact(t), exact(beta), exact(gamma)
    if s < t:
        return _dev(s, b, g)
    if s == t:
        return symmetric_cost(t, n, b, g)
    return _dev(max(t + n - 1, s), b, g)


def symmetric_cost_slope(t: Number, n: int, beta: Number, gamma: Number) -> Fraction:
    """Slope of ``symmetric_cost`` on the open segment containing non-integer ``t``."""
    t, b, g = exact(t), exact(beta), exact(gamma)
    early = sum(1 for i in range(n) if t + i < 0)
    return (b * (n - early) - g * early) / n


def _knots(n: int) -> list[Fraction]:
    return [Fraction(-k) for k in range(n - 1, -1, -1)]


def equilibrium_interval(n: int, beta: Number, gamma: Number) -> EquilibriumInterval:
    """Set of all symmetric equilibria [t_lo, t_hi].

    ``t_lo`` solves beta*(t+n-1) = c(t;t) (serving last stops paying off) and
    ``t_hi`` solves -gamma*t = c(t;t) (arriving first stops paying off).
    """
    return _waiting_bounds(n, beta, gamma, Fraction(0))


def _waiting_bounds(n: int, beta: Number, gamma: Number, alpha: Fraction) -> EquilibriumInterval:
    if n < 2:
        raise InputError("equilibrium analysis needs n >= 2")
    b, g = exact(beta), exact(gamma)
    if b <= 0 or g <= 0:
        raise InputError("beta and gamma must be positive")
    extra = alpha * (n - 1) / 2

    def c(t):
        return symmetric_cost(t, n, b, g)

    knots = _knots(n)
    lo = first_nonneg_pl(lambda t: b * (t + n - 1) - extra - c(t), knots)
    hi = last_nonneg_pl(lambda t: -g * t - extra - c(t), knots)
    te = -(n - 1) * b / (b + g)
    out = EquilibriumInterval.from_bounds(lo, hi)
    if not out.empty and out.contains(te):
        out = EquilibriumInterval(out.lo, out.hi, False, te, out.notes)
    return out


@dataclass(frozen=True)
class BestResponse:
    """Best reply of one customer to the other arriving at ``t`` (two customers).

    ``kind`` is ``point`` (lo == hi), ``moment_before`` (infimum approached by
    arriving just before lo, not attained) or ``interval`` with openness flags.
    """

    kind: str
    lo: Fraction
    hi: Fraction
    lo_open: bool = False
    hi_open: bool = False
    value: Fraction = Fraction(0)
    extrapolated: bool = False

    def contains(self, s: Number) -> bool:
        s = exact(s)
        if self.kind == "moment_before":
            return False
        left = s > self.lo if self.lo_open else s >= self.lo
        right = s < self.hi if self.hi_open else s <= self.hi
        return left and right


def best_response_two(t: Number, beta: Number = 1, gamma: Number = 1) -> BestResponse:
    t, b, g = exact(t), exact(beta), exact(gamma)
    extrapolated = b != g
    if t > 0 or t < -1:
        return BestResponse("point", Fraction(0), Fraction(0), value=Fraction(0), extrapolated=extrapolated)
    first = -g * t  # served first: a moment before t
    last = b * (t + 1)  # served second: anywhere in (t, t+1]
    if first < last:
        return BestResponse("moment_before", t, t, value=first, extrapolated=extrapolated)
    if first > last:
        return BestResponse("interval", t, t + 1, lo_open=True, value=last, extrapolated=extrapolated)
    # indifferent: arriving at t itself averages the two equal outcomes
    return BestResponse("interval", t, t + 1, value=last, extrapolated=extrapolated)


class OptEquilibrium(NamedTuple):
    holds: bool
    witness: Fraction | None


def is_social_opt_equilibrium(n: int, beta: Number, gamma: Number) -> OptEquilibrium:
    """Whether some socially optimal common arrival time is an equilibrium.

    Holds iff beta/(beta+gamma) lies in [1/n, 1-1/n].  The witness is the
    optimal first start -floor(s_tilde) when it is an equilibrium, otherwise
    the nearest point of (optimal set) intersected with the equilibrium interval.
    """
    if n < 2:
        raise InputError("n must be >= 2")
    b, g = exact(beta), exact(gamma)
    ratio = b / (b + g)
    holds = Fraction(1, n) <= ratio <= 1 - Fraction(1, n)
    if not holds:
        return OptEquilibrium(False, None)
    opt = social_optimum_homogeneous(n, b, g)
    eq = equilibrium_interval(n, b, g)
    lo, hi = max(opt.s1_lo, eq.lo), min(opt.s1_hi, eq.hi)
    if lo > hi:
        return OptEquilibrium(True, None)
    return OptEquilibrium(True, min(max(opt.s1_lo, lo), hi))


def price_of_anarchy_stability(n: int, beta: Number, gamma: Number) -> tuple[Fraction, Fraction]:
    """(PoA, PoS): worst and best equilibrium total cost over the optimum.

    The total cost n*c(t;t) is convex piecewise linear, so the extremes over
    the equilibrium interval sit at its endpoints or interior integers.
    """
    b, g = exact(beta), exact(gamma)
    eq = equilibrium_interval(n, b, g)
    opt = social_optimum_homogeneous(n, b, g).total_cost
    candidates = [eq.lo, eq.hi] + [k for k in _knots(n) if eq.lo < k < eq.hi]
    totals = [total_cost_of_start(t, n, b, g) for t in candidates]
    return max(totals) / opt, min(totals) / opt


def opt_equilibrium_region(n_values: Iterable[int]) -> list[tuple[int, Fraction, Fraction]]:
    """Rows (n, 1/n, 1-1/n) bounding the ratios where the optimum is an equilibrium."""
    rows = []
    for n in n_values:
        if n < 2:
            raise InputError("n must be >= 2")
        rows.append((n, Fraction(1, n), 1 - Fraction(1, n)))
    return rows
