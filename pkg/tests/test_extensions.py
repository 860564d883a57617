import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from arrival_game.core import (
    ConsistencyError,
    DeviationCost,
    InputError,
    PopulationModel,
    Scenario,
    ServiceTimeModel,
    UnsupportedConfiguration,
)
from arrival_game.equilibrium import equilibrium_interval, symmetric_cost
from arrival_game.extensions import (
    erlang_tail,
    exponential_equilibrium_interval,
    exponential_late_cost,
    exponential_symmetric_cost,
    heterogeneous_interval,
    ordered_linear_interval,
    position_pmf,
    random_pop_interval,
    ratio_bounds,
    restricted_equilibrium,
    tau_i,
    two_point_service_equilibrium,
    waiting_cost_interval,
)
from arrival_game.oracle import certify_symmetric


# restricted availability


def test_restricted_examples():
    iv = restricted_equilibrium(5, 1, 1, -2, -1.5)
    assert (iv.lo, iv.hi) == (-2, F(-3, 2))
    iv = restricted_equilibrium(5, 1, 1, -1, 0)
    assert iv.is_point and iv.lo == -1
    iv = restricted_equilibrium(5, 1, 1, -5, -3)
    assert iv.is_point and iv.lo == -3
    with pytest.raises(InputError):
        restricted_equilibrium(5, 1, 1, 0, 0)


@pytest.mark.parametrize("a,b", [(-2, -1.5), (-1, 0), (-5, -3), (-10, 10)])
def test_restricted_certified(a, b):
    sc = Scenario.base(5, availability=(a, b))
    iv = restricted_equilibrium(5, 1, 1, a, b)
    for t in (iv.lo, iv.midpoint, iv.hi):
        assert certify_symmetric(t, sc).is_equilibrium


@settings(max_examples=80, deadline=None)
@given(n=st.integers(2, 10), a=st.integers(-40, 0), w=st.integers(1, 40))
def test_restricted_overlap_is_base_subset(n, a, w):
    a, b = F(a, 4), F(a + w, 4)
    base = equilibrium_interval(n, 1, 1)
    iv = restricted_equilibrium(n, 1, 1, a, b)
    assert a <= iv.lo <= iv.hi <= b
    if max(a, base.lo) <= min(b, base.hi):
        assert base.lo <= iv.lo and iv.hi <= base.hi


# waiting costs


def test_waiting_examples():
    res = waiting_cost_interval(5, 1, 1, 0.2)
    assert (res.interval.lo, res.interval.hi) == (F(-7, 3), F(-5, 3))
    assert res.alpha_bar == F(2, 5)
    for alpha in (0.01, 0.1):
        assert waiting_cost_interval(2, 1, 1, alpha).interval.empty
    with pytest.raises(InputError):
        waiting_cost_interval(5, 1, 1, -1)


def test_alpha_bar_matches_grid_maximum():
    grid = [F(k, 1000) for k in range(-4000, 1)]
    best = max(min(-t, t + 4) - symmetric_cost(t, 5, 1, 1) for t in grid)
    assert waiting_cost_interval(5, 1, 1, 0).alpha_bar == best / 2


def test_waiting_interval_shrinks_with_alpha():
    alphas = [F(k, 20) for k in range(0, 9)]
    ivs = [waiting_cost_interval(5, 1, 1, a).interval for a in alphas]
    for wide, narrow in zip(ivs, ivs[1:]):
        if not narrow.empty:
            assert wide.lo <= narrow.lo and narrow.hi <= wide.hi
    assert waiting_cost_interval(5, 1, 1, F(2, 5)).interval.is_point
    assert waiting_cost_interval(5, 1, 1, F(41, 100)).interval.empty


def test_waiting_interval_certified():
    sc = Scenario.base(5, alpha=F(1, 5))
    iv = waiting_cost_interval(5, 1, 1, F(1, 5)).interval
    for t in (iv.lo, iv.midpoint, iv.hi):
        assert certify_symmetric(t, sc).is_equilibrium
    for t in (iv.lo - F(1, 20), iv.hi + F(1, 20)):
        assert not certify_symmetric(t, sc).is_equilibrium


# stochastic service


def test_two_point_formula():
    assert two_point_service_equilibrium(1, 1) == F(-3, 4)
    assert two_point_service_equilibrium(3, 1) == F(-5, 4)
    for g in (1, 2, F(1, 3)):
        b = 2 * g
        assert two_point_service_equilibrium(b, g) == -1 == -3 * b / (2 * (b + g))
    with pytest.raises(UnsupportedConfiguration):
        two_point_service_equilibrium(1, 1, a=1, b=3)
    with pytest.raises(UnsupportedConfiguration):
        two_point_service_equilibrium(1, 1, n=3)


def test_two_point_low_branch_certified():
    sc = Scenario.base(2, service=ServiceTimeModel.two_point())
    assert certify_symmetric(F(-3, 4), sc).is_equilibrium


def test_erlang_tail_examples():
    assert erlang_tail(1, 0) == 1
    assert erlang_tail(1, 1) == pytest.approx(math.exp(-1), abs=1e-15)
    assert erlang_tail(3, 2) == pytest.approx(5 * math.exp(-2), abs=1e-15)
    with pytest.raises(InputError):
        erlang_tail(0, 1)


def test_erlang_tail_matches_gamma_survival():
    from scipy.stats import gamma

    for k in range(1, 8):
        for x in (0.1, 1.0, 3.5, 9.0):
            assert erlang_tail(k, x) == pytest.approx(gamma.sf(x, k), rel=1e-12)


def test_exponential_costs():
    t = -math.log(2)
    assert exponential_symmetric_cost(t, 2, 1, 1) == pytest.approx(math.log(2), abs=1e-14)
    assert exponential_late_cost(0.0, 2, 3.0) == pytest.approx(3.0)
    assert exponential_late_cost(-0.5, 2, 1.0) == pytest.approx(math.exp(-0.5))


def test_exponential_interval():
    iv = exponential_equilibrium_interval(2, 1, 1)
    assert iv.empty and iv.hi == pytest.approx(-math.log(2), abs=1e-9)
    iv = exponential_equilibrium_interval(2, 3, 1)
    assert iv.empty and iv.hi == pytest.approx(math.log(1 / 4), abs=1e-9)
    iv = exponential_equilibrium_interval(5, 1, 1)
    assert not iv.empty and iv.lo < iv.hi < 0


@pytest.mark.slow
def test_exponential_interval_certified_by_simulation():
    sc = Scenario.base(5, service=ServiceTimeModel.exponential())
    iv = exponential_equilibrium_interval(5, 1, 1)
    for t in (iv.lo, iv.midpoint, iv.hi):
        assert certify_symmetric(t, sc, grid_step=0.05, mc_samples=200_000, seed=1).is_equilibrium


# random population


def test_position_pmf_examples():
    pm = position_pmf(PopulationModel.deterministic(4))
    assert pm.p == (F(1, 4),) * 4
    pm = position_pmf(PopulationModel.poisson(1))
    assert pm.p[0] == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert abs(sum(pm.p) - 1) <= 1e-10
    pm = position_pmf(PopulationModel.general([0, 0, 1]))
    assert pm.p == (0.5, 0.5)
    with pytest.raises(InputError):
        position_pmf(PopulationModel.general([1]))


@settings(max_examples=40, deadline=None)
@given(lam=st.floats(0.05, 30))
def test_position_pmf_poisson_properties(lam):
    pm = position_pmf(PopulationModel.poisson(lam))
    assert abs(sum(pm.p) - 1) <= 1e-10
    assert all(a >= b for a, b in zip(pm.p, pm.p[1:]))
    assert abs(sum(pm.q) - 1) <= 1e-10


@pytest.mark.parametrize("n,b,g", [(2, 1, 1), (5, 1, 1), (5, 5, 1), (7, 2, 3)])
def test_random_pop_reduces_to_base(n, b, g):
    res = random_pop_interval(PopulationModel.deterministic(n), b, g)
    base = equilibrium_interval(n, b, g)
    assert (res.interval.lo, res.interval.hi) == (base.lo, base.hi)


def test_random_pop_poisson_four():
    res = random_pop_interval(PopulationModel.poisson(4), 0.5, 0.5)
    assert res.opt_is_equilibrium
    assert res.interval.lo <= res.t_star_lo <= res.t_star_hi <= res.interval.hi


def test_random_pop_certified():
    pop = PopulationModel.poisson(3)
    res = random_pop_interval(pop, 1, 1)
    sc = Scenario(pop, (DeviationCost.linear(),))
    iv = res.interval
    for t in (iv.lo, iv.midpoint, iv.hi):
        assert certify_symmetric(t, sc, epsilon=1e-6).is_equilibrium
    for t in (iv.lo - 0.05, iv.hi + 0.05):
        assert not certify_symmetric(t, sc, epsilon=1e-6).is_equilibrium


# heterogeneous customers


def _quad(beta):
    return [
        DeviationCost.quadratic(beta, 1, -0.5),
        DeviationCost.quadratic(1, 1, 0),
        DeviationCost.quadratic(1, beta, 0.5),
    ]


def test_tau_i_examples():
    tau = tau_i(DeviationCost.quadratic(), 3)
    assert tau.lo == pytest.approx(-7 / 6, abs=1e-9) and tau.hi == pytest.approx(-5 / 6, abs=1e-9)
    tau = tau_i(DeviationCost.linear(), 5)
    assert (tau.lo, tau.hi) == (F(-8, 3), F(-4, 3))
    tau = tau_i(DeviationCost.linear(2, 2), 2)
    assert tau.lo == tau.hi == F(-1, 2)


def test_heterogeneous_examples():
    lin = [DeviationCost.linear(1, 1, -0.25), DeviationCost.linear(), DeviationCost.linear(1, 1, 0.25)]
    iv = heterogeneous_interval(lin)
    assert iv.is_point and iv.lo == -1
    iv = heterogeneous_interval(_quad(5))
    assert iv.is_point and iv.lo == pytest.approx(-1, abs=1e-9)
    assert heterogeneous_interval(_quad(4)).empty


def test_heterogeneous_examples_certified():
    lin = [DeviationCost.linear(1, 1, -0.25), DeviationCost.linear(), DeviationCost.linear(1, 1, 0.25)]
    for costs in (lin, _quad(5)):
        sc = Scenario(PopulationModel.deterministic(3), tuple(costs))
        assert certify_symmetric(-1, sc).is_equilibrium
        for t in (-1.05, -0.95):
            assert not certify_symmetric(t, sc).is_equilibrium


def test_quadratic_family_is_mirror_symmetric():
    # customer 3 mirrors customer 1 under t -> -t - 2, so the interval is centred on -1
    for beta in (5, 17):
        iv = heterogeneous_interval(_quad(beta))
        assert iv.is_point and iv.lo == pytest.approx(-1, abs=1e-9)
    for beta in (8, 12):
        iv = heterogeneous_interval(_quad(beta))
        assert not iv.is_point and iv.lo + iv.hi == pytest.approx(-2, abs=1e-9)
    for beta in (4, 18, 30):
        assert heterogeneous_interval(_quad(beta)).empty


cost_st = st.one_of(
    st.builds(
        DeviationCost.linear,
        st.integers(1, 20).map(lambda k: k / 4),
        st.integers(1, 20).map(lambda k: k / 4),
        st.integers(-2, 2).map(lambda k: k / 8),
    ),
    st.builds(
        DeviationCost.quadratic,
        st.integers(1, 20).map(lambda k: k / 4),
        st.integers(1, 20).map(lambda k: k / 4),
        st.integers(-2, 2).map(lambda k: k / 8),
    ),
)


@settings(max_examples=120, deadline=None)
@given(costs=st.lists(cost_st, min_size=2, max_size=6))
def test_two_representations_agree(costs):
    try:
        iv = heterogeneous_interval(costs)
    except ConsistencyError as exc:  # pragma: no cover - would be the failure signal
        pytest.fail(str(exc))
    lo, hi = ratio_bounds(costs)
    assert abs(float(iv.lo) - lo) <= 1e-8 and abs(float(iv.hi) - hi) <= 1e-8
    taus = [tau_i(c, len(costs)) for c in costs]
    assert all(t.lo <= t.hi for t in taus)
    assert iv.empty == (max(t.lo for t in taus) > min(t.hi for t in taus) + 1e-9)


@settings(max_examples=80, deadline=None)
@given(pairs=st.lists(st.tuples(st.integers(1, 12), st.integers(1, 12)), min_size=2, max_size=6))
def test_ordered_linear_properties(pairs):
    gammas = [F(g, 4) for g, _ in pairs]
    betas = [F(b, 4) for _, b in pairs]
    iv = ordered_linear_interval(gammas, betas)
    ref = heterogeneous_interval([DeviationCost.linear(g, b) for g, b in zip(gammas, betas)])
    assert iv.empty == ref.empty
    assert (iv.lo, iv.hi) == (ref.lo, ref.hi)
    n = len(pairs)
    ranked = sorted(zip(gammas, betas), key=lambda p: p[0] / p[1])
    taus = [tau_i(DeviationCost.linear(g, b), n) for g, b in ranked]
    for a, b in zip(taus, taus[1:]):
        assert a.lo <= b.lo and a.hi <= b.hi


def test_ordered_linear_examples():
    iv = ordered_linear_interval([1, 1, 1], [3, 2, 1])
    ref = heterogeneous_interval([DeviationCost.linear(1, b) for b in (3, 2, 1)])
    assert (iv.lo, iv.hi) == (ref.lo, ref.hi)
    assert ordered_linear_interval([1] * 5, [1] * 5).lo == equilibrium_interval(5, 1, 1).lo
    iv = ordered_linear_interval([1, 1], [1, 1])
    assert iv.is_point and iv.lo == F(-1, 2)
    sc = Scenario(PopulationModel.deterministic(3), tuple(DeviationCost.linear(1, b) for b in (3, 2, 1)))
    iv = ordered_linear_interval([1, 1, 1], [3, 2, 1])
    for t in {iv.lo, iv.midpoint, iv.hi}:
        assert certify_symmetric(t, sc).is_equilibrium
