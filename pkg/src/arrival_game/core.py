"""Domain types, FCFS admission dynamics and exact expected costs of arrival profiles.

Times are plain Python numbers.  Wherever the inputs are exact (``int`` or
``fractions.Fraction``) the arithmetic stays exact; floats are accepted
everywhere and converted with :func:`exact` where a solver needs rationals.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

#: Offset a caller may subtract to place an arrival "just before" another one
#: when generating float candidates.  Exact limits use ``ArrivalProfile.ranks``.
EPS_BEFORE = 1e-9

BEFORE, AT, AFTER = -1, 0, 1


class InputError(ValueError):
    """Malformed or inconsistent input."""


class UnsupportedConfiguration(Exception):
    """A valid input outside the scope of the requested solver."""


class ProblemSizeError(UnsupportedConfiguration):
    pass


class AssumptionViolation(InputError):
    """A cost function is not continuous, unimodal and zero at its due date."""


class ConsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


def exact(x: Number) -> Fraction:
    """Convert a number to a Fraction, reading floats by their shortest repr.

    ``exact(0.1) == Fraction(1, 10)``, so decimal user input keeps its intended
    value instead of the nearest binary fraction.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"non-finite number {x!r}")
    return Fraction(repr(x))


# ---------------------------------------------------------------------------
# Deviation costs


CostKind = Literal["linear", "quadratic", "tabulated"]


@dataclass(frozen=True)
class DeviationCost:
    """Penalty for starting service at time ``s`` instead of the due date ``d``.

    ``linear``     gamma * (d - s)+ + beta * (s - d)+
    ``quadratic``  gamma * (d - s)^2 for s < d, beta * (s - d)^2 otherwise
    ``tabulated``  piecewise-linear interpolation of ``points`` (linear
                   extrapolation beyond the first and last breakpoints); the
                   due date is the breakpoint with value 0.
    """

    kind: CostKind = "linear"
    d: Number = 0
    gamma: Number = 1
    beta: Number = 1
    points: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("linear", "quadratic", "tabulated"):
            raise InputError(f"unknown cost kind {self.kind!r}")
        if self.kind == "tabulated":
            pts = tuple((float(x), float(y)) for x, y in self.points)
            if len(pts) < 3:
                raise InputError("tabulated cost needs at least 3 breakpoints")
            xs = [p[0] for p in pts]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise InputError("tabulated breakpoints must be strictly increasing")
            ys = [p[1] for p in pts]
            k = ys.index(min(ys))
            if ys[k] != 0.0:
                raise AssumptionViolation("tabulated cost must attain 0 at its due date")
            if k == 0 or k == len(pts) - 1:
                raise AssumptionViolation("due date must be an interior breakpoint")
            if any(b >= a for a, b in zip(ys[:k], ys[1 : k + 1])) or any(
                b <= a for a, b in zip(ys[k:], ys[k + 1 :])
            ):
                raise AssumptionViolation("tabulated cost is not strictly unimodal")
            object.__setattr__(self, "points", pts)
            object.__setattr__(self, "d", xs[k])
            # end slopes double as earliness / tardiness rates for extrapolation
            object.__setattr__(self, "gamma", (ys[0] - ys[1]) / (xs[1] - xs[0]))
            object.__setattr__(self, "beta", (ys[-1] - ys[-2]) / (xs[-1] - xs[-2]))
        else:
            for name in ("d", "gamma", "beta"):
                v = getattr(self, name)
                if isinstance(v, float) and not math.isfinite(v):
                    raise InputError(f"{name} must be finite")
            if self.gamma < 0 or self.beta < 0:
                raise InputError("gamma and beta must be non-negative")

    @classmethod
    def linear(cls, gamma: Number = 1, beta: Number = 1, d: Number = 0) -> "DeviationCost":
        return cls("linear", d, gamma, beta)

    @classmethod
    def quadratic(cls, gamma: Number = 1, beta: Number = 1, d: Number = 0) -> "DeviationCost":
        return cls("quadratic", d, gamma, beta)

    @classmethod
    def tabulated(cls, points: Sequence[tuple[float, float]]) -> "DeviationCost":
        return cls("tabulated", points=tuple(map(tuple, points)))

    def __call__(self, s: Number) -> Number:
        if self.kind == "linear":
            if s < self.d:
                return self.gamma * (self.d - s)
            return self.beta * (s - self.d)
        if self.kind == "quadratic":
            if s < self.d:
                return self.gamma * (self.d - s) ** 2
            return self.beta * (s - self.d) ** 2
        return self._interp(float(s))

    def _interp(self, s: float) -> float:
        pts = self.points
        xs = [p[0] for p in pts]
        if s <= xs[0]:
            return pts[0][1] + self.gamma * (xs[0] - s)
        if s >= xs[-1]:
            return pts[-1][1] + self.beta * (s - xs[-1])
        j = bisect.bisect_right(xs, s) - 1
        (x0, y0), (x1, y1) = pts[j], pts[j + 1]
        return y0 + (y1 - y0) * (s - x0) / (x1 - x0)

    def values(self, s) -> np.ndarray:
        """Vectorised evaluation on a float array."""
        s = np.asarray(s, dtype=float)
        d, g, b = float(self.d), float(self.gamma), float(self.beta)
        if self.kind == "linear":
            return np.where(s < d, g * (d - s), b * (s - d))
        if self.kind == "quadratic":
            return np.where(s < d, g * (d - s) ** 2, b * (s - d) ** 2)
        xs = np.array([p[0] for p in self.points])
        ys = np.array([p[1] for p in self.points])
        out = np.interp(s, xs, ys)
        out = np.where(s < xs[0], ys[0] + g * (xs[0] - s), out)
        return np.where(s > xs[-1], ys[-1] + b * (s - xs[-1]), out)

    def knots(self) -> tuple[Number, ...] | None:
        """Breakpoints when the cost is piecewise linear, else ``None``."""
        if self.kind == "linear":
            return (self.d,)
        if self.kind == "tabulated":
            return tuple(p[0] for p in self.points)
        return None

    def shifted(self, delta: Number) -> "DeviationCost":
        if self.kind == "tabulated":
            return DeviationCost.tabulated([(x + delta, y) for x, y in self.points])
        return DeviationCost(self.kind, self.d + delta, self.gamma, self.beta)

    def scaled(self, k: Number) -> "DeviationCost":
        if self.kind == "tabulated":
            return DeviationCost.tabulated([(x, k * y) for x, y in self.points])
        return DeviationCost(self.kind, self.d, k * self.gamma, k * self.beta)

    def check_assumption(self, lo: float | None = None, hi: float | None = None, samples: int = 401):
        """Raise :class:`AssumptionViolation` unless the cost is strictly unimodal.

        The check runs on ``samples`` points of ``[lo, hi]`` (default: the due
        date +- 5 time units) and always includes the due date itself.
        """
        d = float(self.d)
        lo = d - 5.0 if lo is None else lo
        hi = d + 5.0 if hi is None else hi
        if self.kind != "tabulated" and (self.gamma <= 0 or self.beta <= 0):
            raise AssumptionViolation("earliness and tardiness rates must be positive")
        if abs(float(self(self.d))) > 1e-12:
            raise AssumptionViolation("cost must vanish at the due date")
        grid = np.union1d(np.linspace(lo, hi, samples), [d])
        v = self.values(grid)
        left, right = v[grid <= d], v[grid >= d]
        if np.any(np.diff(left) >= 0) or np.any(np.diff(right) <= 0):
            raise AssumptionViolation("cost is not strictly decreasing before / increasing after d")


def deviation_cost(cost: DeviationCost, s: Number) -> Number:
    return cost(s)


# ---------------------------------------------------------------------------
# Service times and population


@dataclass(frozen=True)
class ServiceTimeModel:
    kind: Literal["unit", "two_point", "exponential"] = "unit"
    a: float = 1.0
    b: float = 2.0
    p: float = 0.5  # probability of the short duration ``a``
    rate: float = 1.0

    def __post_init__(self):
        if self.kind == "two_point":
            if not (0 < self.a <= self.b):
                raise InputError("two-point service needs 0 < a <= b")
            if not (0 <= self.p <= 1):
                raise InputError("two-point probability must lie in [0, 1]")
        elif self.kind == "exponential":
            if not self.rate > 0:
                raise InputError("exponential rate must be positive")
        elif self.kind != "unit":
            raise InputError(f"unknown service kind {self.kind!r}")

    @classmethod
    def unit(cls) -> "ServiceTimeModel":
        return cls("unit")

    @classmethod
    def two_point(cls, a: float = 1.0, b: float = 2.0, p: float = 0.5) -> "ServiceTimeModel":
        return cls("two_point", a=a, b=b, p=p)

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "ServiceTimeModel":
        return cls("exponential", rate=rate)

    @property
    def is_unit(self) -> bool:
        return self.kind == "unit"

    def support(self) -> list[tuple[Number, Number]] | None:
        """(duration, probability) pairs for discrete models, ``None`` otherwise."""
        if self.kind == "unit":
            return [(1, 1)]
        if self.kind == "two_point":
            return [(self.a, self.p), (self.b, 1 - self.p)]
        return None

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "unit":
            return np.ones(size)
        if self.kind == "two_point":
            return np.where(rng.random(size) < self.p, self.a, self.b)
        return rng.exponential(1.0 / self.rate, size)


@dataclass(frozen=True)
class PopulationModel:
    """Number of customers: fixed ``n``, Poisson(``lam``) or a general pmf.

    For ``pmf`` the entry at index k is P(N = k).
    """

    kind: Literal["deterministic", "poisson", "pmf"] = "deterministic"
    n: int | None = None
    lam: float | None = None
    pmf: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind == "deterministic":
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise InputError("deterministic population needs an integer n >= 1")
        elif self.kind == "poisson":
            if self.lam is None or not (self.lam > 0 and math.isfinite(self.lam)):
                raise InputError("Poisson population needs lambda > 0")
        elif self.kind == "pmf":
            pmf = tuple(float(x) for x in self.pmf)
            if not pmf or any(x < 0 for x in pmf) or abs(sum(pmf) - 1) > 1e-9:
                raise InputError("population pmf must be non-negative and sum to 1")
            if sum(k * x for k, x in enumerate(pmf)) <= 0:
                raise InputError("population pmf has zero mean")
            object.__setattr__(self, "pmf", pmf)
        else:
            raise InputError(f"unknown population kind {self.kind!r}")

    @classmethod
    def deterministic(cls, n: int) -> "PopulationModel":
        return cls("deterministic", n=n)

    @classmethod
    def poisson(cls, lam: float) -> "PopulationModel":
        return cls("poisson", lam=lam)

    @classmethod
    def general(cls, pmf: Sequence[float]) -> "PopulationModel":
        return cls("pmf", pmf=tuple(pmf))

    @property
    def is_deterministic(self) -> bool:
        return self.kind == "deterministic"


# ---------------------------------------------------------------------------
# Scenario, profiles and schedules


@dataclass(frozen=True)
class Scenario:
    population: PopulationModel
    costs: tuple[DeviationCost, ...]
    service: ServiceTimeModel = ServiceTimeModel()
    availability: tuple[float, float] | None = None
    alpha: Number = 0

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        if not self.costs:
            raise InputError("scenario needs at least one cost function")
        if len(self.costs) > 1:
            if not self.population.is_deterministic:
                raise InputError("per-customer costs require a deterministic population")
            if len(self.costs) != self.population.n:
                raise InputError(
                    f"got {len(self.costs)} cost functions for {self.population.n} customers"
                )
            if not self.service.is_unit:
                raise InputError("heterogeneous customers require unit service times")
        if self.availability is not None:
            a, b = self.availability
            if not a < b:
                raise InputError("availability window needs a < b")
            object.__setattr__(self, "availability", (a, b))
        if self.alpha < 0:
            raise InputError("waiting rate alpha must be non-negative")

    @classmethod
    def base(cls, n: int, beta: Number = 1, gamma: Number = 1, **kwargs) -> "Scenario":
        """Common due date 0, linear penalties, ``n`` customers."""
        return cls(PopulationModel.deterministic(n), (DeviationCost.linear(gamma, beta),), **kwargs)

    @property
    def n(self) -> int:
        if not self.population.is_deterministic:
            raise UnsupportedConfiguration("population size is random")
        return self.population.n

    @property
    def homogeneous(self) -> bool:
        return len(set(self.costs)) == 1

    def cost(self, i: int) -> DeviationCost:
        return self.costs[0] if len(self.costs) == 1 else self.costs[i]

    def available(self, t: Number) -> bool:
        if self.availability is None:
            return True
        a, b = self.availability
        return a <= t <= b


@dataclass(frozen=True)
class ArrivalProfile:
    """Arrival time per customer id.

    ``ranks`` encodes exact left/right limits: a customer with rank -1 arrives
    "a moment before" everyone else recorded at the same time (it is served
    ahead of them but pays costs as if arriving at ``times[i]``).
    """

    times: tuple[Number, ...]
    ranks: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(self.times))
        ranks = tuple(self.ranks) if self.ranks else (AT,) * len(self.times)
        if len(ranks) != len(self.times):
            raise InputError("ranks and times differ in length")
        object.__setattr__(self, "ranks", ranks)

    def __len__(self):
        return len(self.times)

    def groups(self) -> list[tuple[Number, list[int]]]:
        """Tie groups in FCFS order as ``(arrival time, customer ids)``."""
        keyed = sorted(range(len(self.times)), key=lambda i: (self.times[i], self.ranks[i], i))
        out: list[tuple[Number, list[int]]] = []
        last = None
        for i in keyed:
            key = (self.times[i], self.ranks[i])
            if key != last:
                out.append((self.times[i], []))
                last = key
            out[-1][1].append(i)
        return out


def as_profile(profile) -> ArrivalProfile:
    return profile if isinstance(profile, ArrivalProfile) else ArrivalProfile(tuple(profile))


@dataclass(frozen=True)
class ServiceSchedule:
    order: tuple[int, ...]  # customer id served in each position
    starts: tuple[Number, ...]  # start time of each position, nondecreasing

    def start_of(self, customer: int) -> Number:
        return self.starts[self.order.index(customer)]

    def by_customer(self) -> list[Number]:
        out = [None] * len(self.order)
        for pos, i in enumerate(self.order):
            out[i] = self.starts[pos]
        return out


def fcfs_schedule(profile, durations: Sequence[Number], tie_order: Sequence[int] | None = None) -> ServiceSchedule:
    """Service start times under FCFS for one realisation of the lottery.

    ``durations[i]`` is the service time of customer ``i``.  ``tie_order`` is
    the full service order (customer ids); it must list customers by
    nondecreasing arrival and may permute customers within a tie group only.
    Default: ties broken by customer id.
    """
    profile = as_profile(profile)
    n = len(profile)
    if len(durations) != n:
        raise InputError(f"{len(durations)} durations for {n} arrivals")
    if any(not x > 0 for x in durations):
        raise InputError("durations must be positive")
    keys = [(profile.times[i], profile.ranks[i]) for i in range(n)]
    if tie_order is None:
        order = sorted(range(n), key=lambda i: (keys[i], i))
    else:
        order = list(tie_order)
        if sorted(order) != list(range(n)):
            raise InputError("tie_order must be a permutation of customer ids")
        if any(keys[a] > keys[b] for a, b in zip(order, order[1:])):
            raise InputError("tie_order must respect arrival order outside tie groups")
    starts = []
    free = None
    for i in order:
        t = profile.times[i]
        s = t if free is None else max(free, t)
        starts.append(s)
        free = s + durations[i]
    return ServiceSchedule(tuple(order), tuple(starts))


def _check_exact_path(profile: ArrivalProfile, scenario: Scenario):
    if not scenario.population.is_deterministic:
        raise UnsupportedConfiguration("exact profile costs need a deterministic population")
    if len(profile) != scenario.population.n:
        raise InputError(f"profile has {len(profile)} arrivals for {scenario.population.n} customers")
    if scenario.availability is not None:
        a, b = scenario.availability
        for t, r in zip(profile.times, profile.ranks):
            if t < a or t > b or (t == a and r == BEFORE) or (t == b and r == AFTER):
                raise InputError(f"arrival {t} outside availability window [{a}, {b}]")


def expected_profile_cost(profile, scenario: Scenario) -> list[Number]:
    """Expected cost of every customer for a fixed arrival profile.

    Unit service uses slot averaging: a tie group of size k occupies k
    consecutive unit slots whatever the lottery, and each member lands in each
    slot with probability 1/k.  Two-point service is evaluated by enumerating
    duration draws and tie orders.  Exponential service has no exact path here
    (use :func:`arrival_game.oracle.mc_profile_cost`).
    """
    profile = as_profile(profile)
    _check_exact_path(profile, scenario)
    if scenario.service.kind == "exponential":
        raise UnsupportedConfiguration(
            "no exact evaluation for exponential service; use the Monte Carlo oracle"
        )
    if scenario.service.kind == "two_point":
        return enumerated_profile_cost(profile, scenario)

    alpha = scenario.alpha
    costs: list[Number] = [0] * len(profile)
    free = None
    for t, members in profile.groups():
        k = len(members)
        first = t if free is None else max(free, t)
        slots = [first + j for j in range(k)]
        waiting = alpha * sum(s - t for s in slots) if alpha else 0
        for i in members:
            c = scenario.cost(i)
            total = sum(c(s) for s in slots) + waiting
            costs[i] = Fraction(total, k) if isinstance(total, (int, Fraction)) else total / k
        free = first + k
    return costs


_MAX_ENUMERATION = 200_000


def enumerated_profile_cost(profile, scenario: Scenario) -> list[Number]:
    """Expected costs by explicit enumeration of tie orders and duration draws."""
    profile = as_profile(profile)
    _check_exact_path(profile, scenario)
    support = scenario.service.support()
    if support is None:
        raise UnsupportedConfiguration("enumeration needs a discrete service distribution")
    n = len(profile)
    groups = profile.groups()
    n_orders = math.prod(math.factorial(len(m)) for _, m in groups)
    if n_orders * len(support) ** n > _MAX_ENUMERATION:
        raise ProblemSizeError("too many lottery outcomes for exact enumeration")

    orders = [
        [i for perm in combo for i in perm]
        for combo in itertools.product(*(itertools.permutations(m) for _, m in groups))
    ]
    totals = [0.0] * n
    weight_orders = 1.0 / len(orders)
    for draw in itertools.product(support, repeat=n):
        durations = [dur for dur, _ in draw]
        prob = math.prod(float(p) for _, p in draw)
        if prob == 0:
            continue
        for order in orders:
            sched = fcfs_schedule(profile, durations, order)
            for pos, i in enumerate(sched.order):
                s = sched.starts[pos]
                c = float(scenario.cost(i)(s)) + float(scenario.alpha) * (s - profile.times[i])
                totals[i] += prob * weight_orders * c
    return totals
