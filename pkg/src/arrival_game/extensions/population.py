"""Random number of customers.

A tagged customer who arrives with everyone else at ``t`` is served in
position i with probability p_i = P(N >= i) / E[N]; the number of *other*
customers M has q_m = (m+1) * P(N = m+1) / E[N].
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import poisson

from .._roots import first_nonneg_pl, last_nonneg_pl
from ..core import InputError, Number, PopulationModel, exact
from ..equilibrium import EquilibriumInterval


@dataclass(frozen=True)
class PositionPmf:
    p: tuple[Number, ...]  # p[i-1] = P(served i-th)
    q: tuple[Number, ...]  # q[m] = P(m other customers)
    mean: Number
    tail_mass: float  # probability mass of p dropped by truncation

    @property
    def truncation(self) -> int:
        return len(self.p)


def _population_pmf(pop: PopulationModel, eps: float) -> list[Number]:
    if pop.kind == "deterministic":
        return [0] * pop.n + [1]
    if pop.kind == "pmf":
        return list(pop.pmf)
    lam = pop.lam
    top = int(poisson.isf(eps * 1e-3, lam)) + 2
    return list(poisson.pmf(np.arange(top + 1), lam))


def position_pmf(pop: PopulationModel, truncation_eps: float = 1e-12) -> PositionPmf:
    pi = _population_pmf(pop, truncation_eps)
    mean = sum(k * x for k, x in enumerate(pi))
    if mean <= 0:
        raise InputError("population has zero mean")
    if pop.kind == "deterministic":
        n = pop.n
        return PositionPmf((Fraction(1, n),) * n, (0,) * (n - 1) + (1,), n, 0.0)
    # P(N >= i) for i = 1..len(pi)-1
    survival = np.cumsum(np.asarray(pi[::-1], dtype=float))[::-1][1:]
    p = survival / mean
    keep = len(p)
    tail = 0.0
    while keep > 1 and tail + p[keep - 1] < truncation_eps:
        tail += p[keep - 1]
        keep -= 1
    q = [(m + 1) * pi[m + 1] / mean for m in range(len(pi) - 1)]
    return PositionPmf(tuple(float(x) for x in p[:keep]), tuple(q), float(mean), float(tail))


@dataclass(frozen=True)
class RandomPopulationResult:
    interval: EquilibriumInterval
    t_star_lo: Number  # optimal common arrival times form [t_star_lo, t_star_hi]
    t_star_hi: Number
    opt_is_equilibrium: bool


def _pi_costs(pmf: PositionPmf, beta, gamma):
    p, q = pmf.p, pmf.q

    def dev(s):
        return gamma * -s if s < 0 else beta * s

    def together(t):
        return sum(pi * dev(t + i) for i, pi in enumerate(p))

    def at_zero(t):
        return beta * sum(qm * (t + m) for m, qm in enumerate(q) if t + m > 0)

    return together, at_zero


def random_pop_interval(pop: PopulationModel, beta: Number, gamma: Number, truncation_eps: float = 1e-12) -> RandomPopulationResult:
    """Equilibrium interval and optimal common arrival time under a random population.

    The lower end solves c_pi(t;t) = c_pi(0;t) (waiting to arrive at 0 stops
    paying off), the upper end c_pi(t;t) = -gamma*t.  Both sides are piecewise
    linear with integer breakpoints and are solved per segment.  The social
    optimum minimises c_pi(t;t), which is convex piecewise linear, so its
    minimisers are an integer or a segment between two integers.
    """
    pmf = position_pmf(pop, truncation_eps)
    if pop.kind == "deterministic":
        b, g = exact(beta), exact(gamma)
    else:
        b, g = float(beta), float(gamma)
    if b <= 0 or g <= 0:
        raise InputError("beta and gamma must be positive")
    together, at_zero = _pi_costs(pmf, b, g)
    K = max(pmf.truncation, len(pmf.q))
    knots = [Fraction(-k) if pop.kind == "deterministic" else float(-k) for k in range(K, -1, -1)]

    lo = first_nonneg_pl(lambda t: at_zero(t) - together(t), knots)
    hi = last_nonneg_pl(lambda t: -g * t - together(t), knots)
    tol = 0 if pop.kind == "deterministic" else 1e-12
    if tol:
        lo, hi = (None if x is None else float(x) for x in (lo, hi))
    interval = EquilibriumInterval.from_bounds(lo, hi, tol=tol)

    vals = [together(k) for k in knots]
    vmin = min(vals)
    slack = 0 if pop.kind == "deterministic" else 1e-12 * (1 + abs(vmin))
    opt = [k for k, v in zip(knots, vals) if v <= vmin + slack]
    t_lo, t_hi = min(opt), max(opt)
    ok = (not interval.empty) and max(t_lo, interval.lo) <= min(t_hi, interval.hi) + tol
    return RandomPopulationResult(interval, t_lo, t_hi, ok)


def poisson_opt_equilibrium_boundary(lambdas: Iterable[float], ratio_step: float = 0.02) -> list[tuple[float, float | None]]:
    """For each mean, the smallest beta/(beta+gamma) on the ratio grid whose optimum is an equilibrium."""
    steps = int(round(1 / ratio_step))
    ratios = [k / steps for k in range(1, steps)]
    rows = []
    for lam in lambdas:
        pop = PopulationModel.poisson(float(lam))
        found = None
        for r in ratios:
            if random_pop_interval(pop, r, 1 - r).opt_is_equilibrium:
                found = r
                break
        rows.append((float(lam), found))
    return rows
