"""Brute-force checks of equilibrium claims.

Nothing here uses the closed-form solvers.  Deterministic service is
evaluated through the FCFS lottery in :mod:`arrival_game.core`; random
service times through Monte Carlo with common random numbers; random
populations as an explicit mixture over the number of other customers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from .core import (
    AT,
    BEFORE,
    ArrivalProfile,
    InputError,
    Number,
    PopulationModel,
    Scenario,
    UnsupportedConfiguration,
    as_profile,
    expected_profile_cost,
    exact,
    fcfs_schedule,
)

DEFAULT_EPS_DETERMINISTIC = 1e-6
DEFAULT_EPS_STOCHASTIC = 1e-3
CHUNK = 100_000


@dataclass(frozen=True)
class Certification:
    """Outcome of a best-response search against a common arrival time.

    ``gain`` is the largest cost reduction any single customer achieved
    (symmetric cost minus deviation cost); ``best_deviation_kind`` is
    ``moment_before`` for the exact left limit, otherwise ``time``.
    """

    candidate: float
    is_equilibrium: bool
    best_deviation: float
    best_deviation_kind: str
    customer: int
    gain: float
    symmetric_cost: float
    se: float
    grid_step: float
    mc_samples: int
    seed: int
    epsilon: float


# ---------------------------------------------------------------------------
# Monte Carlo


def _chunks(samples: int, seed: int):
    sizes = [CHUNK] * (samples // CHUNK) + ([samples % CHUNK] if samples % CHUNK else [])
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    for size, seq in zip(sizes, seqs):
        yield size, np.random.default_rng(seq)


def _batch_starts(times: np.ndarray, ranks: np.ndarray, durations: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """FCFS start time of every customer in every sample.

    ``durations`` and ``keys`` are (samples, n); ``keys`` is a uniform
    lottery ticket breaking ties among equal (time, rank).
    """
    samples, n = durations.shape
    order = np.lexsort((keys, np.broadcast_to(ranks, keys.shape), np.broadcast_to(times, keys.shape)), axis=1)
    rows = np.arange(samples)
    starts = np.empty((samples, n))
    free = np.full(samples, -np.inf)
    for pos in range(n):
        who = order[:, pos]
        s = np.maximum(free, times[who])
        starts[rows, who] = s
        free = s + durations[rows, who]
    return starts


def _sample_costs(profile: ArrivalProfile, scenario: Scenario, size: int, rng) -> np.ndarray:
    n = len(profile)
    times = np.array([float(x) for x in profile.times])
    ranks = np.array(profile.ranks, dtype=float)
    durations = scenario.service.sample(rng, (size, n))
    keys = rng.random((size, n))
    starts = _batch_starts(times, ranks, durations, keys)
    out = np.empty((size, n))
    for i in range(n):
        out[:, i] = scenario.cost(i).values(starts[:, i]) + float(scenario.alpha) * (starts[:, i] - times[i])
    return out


def mc_profile_cost(profile, scenario: Scenario, samples: int = 100_000, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-customer mean cost and standard error by simulation."""
    if samples < 1:
        raise InputError("samples must be >= 1")
    profile = as_profile(profile)
    if not scenario.population.is_deterministic or len(profile) != scenario.population.n:
        raise InputError("profile length must match a deterministic population")
    total = np.zeros(len(profile))
    total_sq = np.zeros(len(profile))
    for size, rng in _chunks(samples, seed):
        c = _sample_costs(profile, scenario, size, rng)
        total += c.sum(axis=0)
        total_sq += (c**2).sum(axis=0)
    mean = total / samples
    var = np.maximum(total_sq / samples - mean**2, 0.0)
    se = np.sqrt(var / max(samples - 1, 1)) if samples > 1 else np.zeros_like(mean)
    return mean, se


def mc_symmetric_cost(t: Number, scenario: Scenario, samples: int = 100_000, seed: int = 0, customer: int = 0) -> tuple[float, float]:
    """Expected cost of ``customer`` when everyone arrives at ``t``.

    With unit service and at most 5040 lottery orders the lottery is
    enumerated and the standard error is 0.
    """
    if samples < 1:
        raise InputError("samples must be >= 1")
    if not scenario.population.is_deterministic:
        raise UnsupportedConfiguration("simulation needs a fixed number of customers")
    n = scenario.population.n
    profile = ArrivalProfile((t,) * n)
    if scenario.service.is_unit and math.factorial(n) <= 5040:
        total = 0.0
        for order in itertools.permutations(range(n)):
            s = float(t) + order.index(customer)
            total += float(scenario.cost(customer)(s)) + float(scenario.alpha) * (s - float(t))
        return total / math.factorial(n), 0.0
    mean, se = mc_profile_cost(profile, scenario, samples, seed)
    return float(mean[customer]), float(se[customer])


# ---------------------------------------------------------------------------
# certification


def _candidates(t: Fraction, n_hi: int, scenario: Scenario, grid_step: float):
    """(time, rank) deviations: analytic points first, then a grid over [t-1, t+n_hi]."""
    pts = [(t, BEFORE), (t + n_hi - 1, AT), (Fraction(0), AT)]
    pts += [(exact(c.d), AT) for c in scenario.costs]
    if scenario.availability is not None:
        pts += [(exact(x), AT) for x in scenario.availability]
    m = int(math.ceil((n_hi + 1) / grid_step))
    pts += [(t - 1 + Fraction(k) * exact(grid_step), AT) for k in range(m + 1)]
    seen, out = set(), []
    for s, r in pts:
        if (s, r) in seen or (s == t and r == AT):
            continue
        if scenario.availability is not None:
            a, b = (exact(x) for x in scenario.availability)
            if s < a or s > b or (s == a and r == BEFORE):
                continue
        seen.add((s, r))
        out.append((s, r))
    return out


def _deviant_profile(n: int, i: int, t, s, r) -> ArrivalProfile:
    times = [t] * n
    ranks = [AT] * n
    times[i], ranks[i] = s, r
    return ArrivalProfile(tuple(times), tuple(ranks))


def _certify_exact(t, scenario, grid_step, eps, customers):
    n = scenario.population.n
    sym = expected_profile_cost(ArrivalProfile((t,) * n), scenario)
    best = (-math.inf, None, None, 0)
    for s, r in _candidates(t, n, scenario, grid_step):
        for i in customers:
            gain = sym[i] - expected_profile_cost(_deviant_profile(n, i, t, s, r), scenario)[i]
            if gain > best[0]:
                best = (gain, s, r, i)
    gain, s, r, i = best
    return float(gain), s, r, i, float(sym[i]), 0.0


def _certify_mc(t, scenario, grid_step, mc_samples, seed):
    """Common random numbers: one draw of durations and lottery serves every candidate."""
    n = scenario.population.n
    c = scenario.cost(0)
    alpha = float(scenario.alpha)
    tf = float(t)
    cands = _candidates(t, n, scenario, grid_step)
    sums = np.zeros(len(cands))
    sums_sq = np.zeros(len(cands))
    sym_total = 0.0
    for size, rng in _chunks(mc_samples, seed):
        others = scenario.service.sample(rng, (size, n - 1))
        ahead = rng.integers(0, n, size)
        csum = np.concatenate([np.zeros((size, 1)), np.cumsum(others, axis=1)], axis=1)
        wait = csum[np.arange(size), ahead]
        sym = c.values(tf + wait) + alpha * wait
        sym_total += sym.sum()
        busy = tf + csum[:, -1]
        for k, (s, r) in enumerate(cands):
            sf = float(s)
            if sf < tf or r == BEFORE:
                dev = np.full(size, float(c(s)))
            else:
                start = np.maximum(sf, busy)
                dev = c.values(start) + alpha * (start - sf)
            diff = sym - dev
            sums[k] += diff.sum()
            sums_sq[k] += (diff**2).sum()
    mean = sums / mc_samples
    se = np.sqrt(np.maximum(sums_sq / mc_samples - mean**2, 0.0) / max(mc_samples - 1, 1))
    # rank by the one-sided test statistic so noise does not pick the winner
    k = int(np.argmax(mean - 3 * se))
    s, r = cands[k]
    return float(mean[k]), s, r, 0, sym_total / mc_samples, float(se[k])


def _others_pmf(pop: PopulationModel, eps: float = 1e-15) -> list[tuple[int, float]]:
    """P(M = m) for the number of other customers, read straight from the population pmf."""
    if pop.kind == "poisson":
        top = int(poisson.isf(eps, pop.lam)) + 2
        return [(m, float(poisson.pmf(m, pop.lam))) for m in range(top)]
    pmf = [(1.0 if k == pop.n else 0.0) for k in range(pop.n + 1)] if pop.is_deterministic else list(pop.pmf)
    mean = sum(k * x for k, x in enumerate(pmf))
    return [(m, (m + 1) * pmf[m + 1] / mean) for m in range(len(pmf) - 1) if pmf[m + 1] > 0]


def _certify_mixture(t, scenario, grid_step):
    c = scenario.cost(0)
    alpha = scenario.alpha
    q = _others_pmf(scenario.population)
    m_hi = max(m for m, _ in q) + 1

    def sym_cost():
        return sum(w * sum(c(t + k) + alpha * k for k in range(m + 1)) / (m + 1) for m, w in q)

    def dev_cost(s, r):
        if s < t or r == BEFORE:
            return c(s)
        return sum(w * (c(max(s, t + m)) + alpha * (max(s, t + m) - s)) for m, w in q)

    sym = float(sym_cost())
    best = (-math.inf, None, None)
    for s, r in _candidates(t, m_hi, scenario, grid_step):
        gain = sym - float(dev_cost(s, r))
        if gain > best[0]:
            best = (gain, s, r)
    return best[0], best[1], best[2], 0, sym, 0.0


def certify_symmetric(
    t: Number,
    scenario: Scenario,
    grid_step: float = 0.01,
    epsilon: float | None = None,
    mc_samples: int = 100_000,
    seed: int = 0,
) -> Certification:
    """Search for a profitable unilateral deviation from everyone arriving at ``t``.

    Candidates are arriving a moment before ``t`` (exact left limit),
    ``t+n-1``, 0, every due date, the availability edges and a grid over
    ``[t-1, t+n]``.  ``t`` is certified when no candidate improves on the
    symmetric cost by more than ``epsilon + 3*SE``.
    """
    if grid_step <= 0:
        raise InputError("grid_step must be positive")
    if epsilon is not None and not epsilon >= 0:
        raise InputError("epsilon must be non-negative")
    t_ex = exact(t)
    if scenario.availability is not None and not scenario.available(t_ex):
        raise InputError("candidate lies outside the availability window")
    service = scenario.service
    pop = scenario.population
    stochastic = service.kind == "exponential"
    eps = epsilon if epsilon is not None else (DEFAULT_EPS_STOCHASTIC if stochastic else DEFAULT_EPS_DETERMINISTIC)
    if not pop.is_deterministic:
        if not service.is_unit:
            raise UnsupportedConfiguration("random populations are certified for unit service only")
        gain, s, r, i, sym, se = _certify_mixture(t_ex, scenario, grid_step)
    elif stochastic:
        if mc_samples < 100_000:
            raise InputError("stochastic certification needs at least 1e5 samples")
        if not scenario.homogeneous:
            raise UnsupportedConfiguration("stochastic service with heterogeneous costs")
        gain, s, r, i, sym, se = _certify_mc(t_ex, scenario, grid_step, mc_samples, seed)
    else:
        customers = [0] if scenario.homogeneous else list(range(pop.n))
        gain, s, r, i, sym, se = _certify_exact(t_ex, scenario, grid_step, eps, customers)
    return Certification(
        candidate=float(t),
        is_equilibrium=bool(gain <= eps + 3 * se),
        best_deviation=float(s),
        best_deviation_kind="moment_before" if r == BEFORE else "time",
        customer=i,
        gain=float(gain),
        symmetric_cost=float(sym),
        se=float(se),
        grid_step=grid_step,
        mc_samples=mc_samples if stochastic else 0,
        seed=seed,
        epsilon=eps,
    )


# ---------------------------------------------------------------------------
# asymmetric profiles


def _player_gain(times: Sequence[Fraction], i: int, scenario: Scenario, grid, stop: float = math.inf) -> float:
    """Largest improvement available to player ``i``; returns early once it exceeds ``stop``."""
    n = len(times)
    base = expected_profile_cost(ArrivalProfile(tuple(times)), scenario)[i]
    others = sorted({x for j, x in enumerate(times) if j != i})
    cands = [(x, BEFORE) for x in others] + [(x, AT) for x in others] + [(x, AT) for x in grid]
    best = -math.inf
    for s, r in cands:
        if s == times[i] and r == AT:
            continue
        tt, rr = list(times), [AT] * n
        tt[i], rr[i] = s, r
        gain = base - expected_profile_cost(ArrivalProfile(tuple(tt), tuple(rr)), scenario)[i]
        best = max(best, gain)
        if best > stop:
            break
    return float(best)


def asymmetric_scan(n: int, beta: Number = 1, gamma: Number = 1, grid_step: float = 0.05, epsilon: float = 0.01) -> list[tuple[float, ...]]:
    """Grid profiles with at least two distinct arrival times that survive every deviation.

    Profiles are multisets of grid points in ``[-n, 1]`` (customers are
    interchangeable).  Deviations are the grid itself plus arriving at, or a
    moment before, each other customer's time.
    """
    if not 2 <= n <= 4:
        raise InputError("asymmetric scan supports 2 <= n <= 4")
    scenario = Scenario.base(n, beta, gamma)
    step = exact(grid_step)
    m = int(round((n + 1) / step))
    grid = [Fraction(-n) + k * step for k in range(m + 1)]
    survivors = []
    for prof in itertools.combinations_with_replacement(grid, n):
        if len(set(prof)) < 2:
            continue
        # one representative per distinct arrival time is enough
        players = {x: i for i, x in enumerate(prof)}.values()
        if all(_player_gain(prof, i, scenario, grid, epsilon) <= epsilon for i in players):
            survivors.append(tuple(float(x) for x in prof))
    return survivors


# ---------------------------------------------------------------------------
# schedule summaries


def schedule_summary(profile, scenario: Scenario, samples: int = 100_000, seed: int = 0) -> dict[str, list[float]]:
    """Mean, minimum and maximum start time of each customer.

    Discrete service is enumerated over tie orders and duration draws;
    exponential service is sampled.
    """
    profile = as_profile(profile)
    n = len(profile)
    support = scenario.service.support()
    if support is not None:
        groups = profile.groups()
        orders = [
            [i for perm in combo for i in perm]
            for combo in itertools.product(*(itertools.permutations(m) for _, m in groups))
        ]
        if len(orders) * len(support) ** n > 200_000:
            raise UnsupportedConfiguration("too many lottery outcomes to summarise exactly")
        mean = np.zeros(n)
        lo = np.full(n, np.inf)
        hi = np.full(n, -np.inf)
        for draw in itertools.product(support, repeat=n):
            prob = math.prod(float(p) for _, p in draw)
            if prob == 0:
                continue
            for order in orders:
                starts = np.array(fcfs_schedule(profile, [x for x, _ in draw], order).by_customer(), dtype=float)
                mean += prob * starts / len(orders)
                lo, hi = np.minimum(lo, starts), np.maximum(hi, starts)
        return {"mean_start": mean.tolist(), "min_start": lo.tolist(), "max_start": hi.tolist()}
    times = np.array([float(x) for x in profile.times])
    ranks = np.array(profile.ranks, dtype=float)
    total = np.zeros(n)
    lo = np.full(n, np.inf)
    hi = np.full(n, -np.inf)
    for size, rng in _chunks(samples, seed):
        starts = _batch_starts(times, ranks, scenario.service.sample(rng, (size, n)), rng.random((size, n)))
        total += starts.sum(axis=0)
        lo, hi = np.minimum(lo, starts.min(axis=0)), np.maximum(hi, starts.max(axis=0))
    return {"mean_start": (total / samples).tolist(), "min_start": lo.tolist(), "max_start": hi.tolist()}
