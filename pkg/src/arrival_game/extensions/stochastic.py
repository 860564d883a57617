"""Stochastic service times: a two-point example and exponential service."""
from __future__ import annotations

import math

from .._roots import first_nonneg, last_nonneg
from ..core import InputError, Number, UnsupportedConfiguration, exact
from ..equilibrium import EquilibriumInterval


def two_point_service_equilibrium(beta: Number, gamma: Number, a: float = 1, b: float = 2, p: float = 0.5, n: int = 2):
    """Closed-form symmetric equilibrium for two customers with service 1 or 2 (prob 1/2 each).

    Returns -3*beta/(2(beta+gamma)) when beta <= 2*gamma and
    -(2*beta-gamma)/(beta+gamma) otherwise.  Only that instance is supported.
    """
    if (n, a, b, p) != (2, 1, 2, 0.5):
        raise UnsupportedConfiguration("closed form only for n=2, service in {1, 2} with p=1/2")
    bt, g = exact(beta), exact(gamma)
    if bt <= 0 or g <= 0:
        raise InputError("beta and gamma must be positive")
    if bt <= 2 * g:
        return -3 * bt / (2 * (bt + g))
    return -(2 * bt - g) / (bt + g)


def erlang_tail(k: int, x: float) -> float:
    """P(Y_k > x) for Y_k a sum of k unit-rate exponentials."""
    if k < 1:
        raise InputError("k must be >= 1")
    if x < 0:
        raise InputError("x must be >= 0")
    term, total = 1.0, 1.0
    for j in range(1, k):
        term *= x / j
        total += term
    return math.exp(-x) * total


def exponential_symmetric_cost(t: float, n: int, beta: float, gamma: float) -> float:
    """Expected cost per customer when all n arrive at t <= 0, unit-rate exponential service.

    Uses E[Y_i; Y_i > x] = i * P(Y_{i+1} > x) for the Erlang partial means.
    """
    if t > 0:
        raise InputError("closed form assumes t <= 0")
    x = -t
    total = -gamma * t
    for i in range(1, n):
        late_i, late_next = erlang_tail(i, x), erlang_tail(i + 1, x)
        total -= gamma * (t * (1 - late_i) + i * (1 - late_next))
        total += beta * (t * late_i + i * late_next)
    return total / n


def exponential_late_cost(t: float, n: int, beta: float) -> float:
    """Cost of deviating to time 0 while the other n-1 arrive at t <= 0."""
    if t > 0:
        raise InputError("closed form assumes t <= 0")
    return beta * (t * erlang_tail(n - 1, -t) + (n - 1) * erlang_tail(n, -t))


def exponential_equilibrium_interval(n: int, beta: float, gamma: float, tol: float = 1e-12) -> EquilibriumInterval:
    """Symmetric equilibria under unit-rate exponential service.

    ``lo`` = inf{t<0 : c_G(0;t) >= c_G(t;t)}, ``hi`` = sup{t<0 : -gamma*t >= c_G(t;t)},
    located by a grid scan over [-(2n+10), 0] and refined by Brent's method.
    The interval is empty when hi < lo (always the case for n = 2).
    """
    if n < 2:
        raise InputError("n must be >= 2")
    beta, gamma = float(beta), float(gamma)
    if beta <= 0 or gamma <= 0:
        raise InputError("beta and gamma must be positive")
    lo_t = -(2.0 * n + 10.0)

    def late_gain(t):
        return exponential_late_cost(t, n, beta) - exponential_symmetric_cost(t, n, beta, gamma)

    def early_gain(t):
        return -gamma * t - exponential_symmetric_cost(t, n, beta, gamma)

    lo = first_nonneg(late_gain, lo_t, 0.0, step=1e-2, xtol=tol)
    hi = last_nonneg(early_gain, lo_t, -1e-300, step=1e-2, xtol=tol)
    return EquilibriumInterval.from_bounds(lo, hi, notes=("numerical root search",))
