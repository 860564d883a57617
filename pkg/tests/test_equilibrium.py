from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from arrival_game.core import InputError, Scenario
from arrival_game.equilibrium import (
    EquilibriumInterval,
    best_response_two,
    deviation_cost_landscape,
    equilibrium_interval,
    is_social_opt_equilibrium,
    opt_equilibrium_region,
    price_of_anarchy_stability,
    symmetric_cost,
    symmetric_cost_slope,
)
from arrival_game.oracle import certify_symmetric

rate = st.integers(1, 100).map(lambda k: F(k, 10))


def _c(t, n, b, g):
    return sum(g * -(t + i) if t + i < 0 else b * (t + i) for i in range(n)) / n


def _bisect(f, lo, hi):
    for _ in range(200):
        mid = (lo + hi) / 2
        if (f(mid) >= 0) == (f(lo) >= 0):
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def test_symmetric_cost_examples():
    assert symmetric_cost(-2, 5, 1, 1) == F(6, 5)
    assert symmetric_cost(F(-1, 2), 2, 4, 4) == 2
    assert symmetric_cost(F(-8, 3), 5, 1, 1) == F(4, 3)


def test_segment_formula_on_minus_three_to_minus_two():
    # slots t..t+4 hold three early and two late starts: (-3t - 3 + 2t + 7)/5
    for t in (F(-29, 10), F(-5, 2), F(-21, 10)):
        assert symmetric_cost(t, 5, 1, 1) == (4 - t) / 5
        assert symmetric_cost(t, 5, 1, 1) == sum(abs(t + i) for i in range(5)) / 5


def test_landscape_branches():
    assert deviation_cost_landscape(-3, -2, 5, 1, 1) == 3
    assert deviation_cost_landscape(-2, -2, 5, 1, 1) == F(6, 5)
    assert deviation_cost_landscape(-1, -2, 5, 1, 1) == 2
    assert deviation_cost_landscape(3, -2, 5, 1, 1) == 3


def test_interval_examples():
    iv = equilibrium_interval(5, 1, 1)
    assert (iv.lo, iv.hi, iv.witness) == (F(-8, 3), F(-4, 3), -2)
    iv = equilibrium_interval(5, 5, 1)
    assert (iv.lo, iv.hi, iv.witness) == (F(-43, 12), F(-8, 3), F(-10, 3))
    iv = equilibrium_interval(2, 1, 1)
    assert iv.is_point and iv.lo == F(-1, 2)


def test_interval_rejects_bad_input():
    with pytest.raises(InputError):
        equilibrium_interval(1, 1, 1)
    with pytest.raises(InputError):
        equilibrium_interval(3, 0, 1)


def test_from_bounds_merges_within_tolerance():
    iv = EquilibriumInterval.from_bounds(-1.0 + 1e-12, -1.0, tol=1e-9)
    assert iv.is_point and iv.notes
    assert EquilibriumInterval.from_bounds(-0.5, -1.0, tol=1e-9).empty
    assert EquilibriumInterval.from_bounds(None, -1.0).empty


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 30), b=rate, g=rate)
def test_interval_properties(n, b, g):
    iv = equilibrium_interval(n, b, g)
    te = -(n - 1) * b / (b + g)
    assert iv.lo <= te <= iv.hi
    assert -(n - 1) < iv.lo <= iv.hi < 0
    # endpoints satisfy their defining equations with equality
    assert b * (iv.lo + n - 1) == symmetric_cost(iv.lo, n, b, g)
    assert -g * iv.hi == symmetric_cost(iv.hi, n, b, g)
    # bisection on the same equations in floats
    bf, gf = float(b), float(g)
    lo = _bisect(lambda t: bf * (t + n - 1) - _c(t, n, bf, gf), -(n - 1), 0)
    hi = _bisect(lambda t: -gf * t - _c(t, n, bf, gf), -(n - 1), 0)
    assert abs(lo - float(iv.lo)) <= 1e-9 and abs(hi - float(iv.hi)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), b=rate, g=rate, u=st.integers(0, 100))
def test_inside_no_deviation_outside_some(n, b, g, u):
    iv = equilibrium_interval(n, b, g)
    t = iv.lo + (iv.hi - iv.lo) * F(u, 100)
    assert symmetric_cost(t, n, b, g) <= min(-g * t, b * (t + n - 1))
    for t_out in (iv.lo - F(1, 1000), iv.hi + F(1, 1000)):
        assert symmetric_cost(t_out, n, b, g) > min(-g * t_out, b * (t_out + n - 1))


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 15), b=rate, g=rate, t=st.integers(-1500, 0).map(lambda k: F(2 * k + 1, 200)))
def test_slope_formula(n, b, g, t):
    if not -(n - 1) < t < 0:
        return
    i_t = max(i for i in range(n) if t + i < 0)
    h = F(1, 10**6)
    numeric = (symmetric_cost(t + h, n, b, g) - symmetric_cost(t - h, n, b, g)) / (2 * h)
    assert numeric == symmetric_cost_slope(t, n, b, g)
    assert numeric == (b * (n - 1 - i_t) - g * (i_t + 1)) / n


@pytest.mark.parametrize(
    "t,kind,lo,hi,lo_open",
    [
        (F(-1, 4), "moment_before", F(-1, 4), F(-1, 4), False),
        (F(-3, 4), "interval", F(-3, 4), F(1, 4), True),
        (F(-3, 2), "point", 0, 0, False),
        (F(1, 2), "point", 0, 0, False),
        (F(-1, 2), "interval", F(-1, 2), F(1, 2), False),
    ],
)
def test_best_response_two(t, kind, lo, hi, lo_open):
    br = best_response_two(t)
    assert (br.kind, br.lo, br.hi, br.lo_open) == (kind, lo, hi, lo_open)
    assert not br.extrapolated
    assert best_response_two(t, 2, 1).extrapolated


def test_best_response_values_are_attained():
    for t in [F(k, 20) for k in range(-30, 10)]:
        br = best_response_two(t)
        if br.kind == "interval":
            mid = (br.lo + br.hi) / 2
            assert deviation_cost_landscape(mid, t, 2, 1, 1) == br.value


def test_opt_equilibrium_examples():
    assert is_social_opt_equilibrium(5, 1, 1).holds
    assert not is_social_opt_equilibrium(5, 5, 1).holds
    res = is_social_opt_equilibrium(2, 3, 3)
    assert res.holds and res.witness == F(-1, 2)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 15), b=rate, g=rate)
def test_opt_witness_in_both_sets(n, b, g):
    res = is_social_opt_equilibrium(n, b, g)
    if res.holds:
        iv = equilibrium_interval(n, b, g)
        assert iv.contains(res.witness)


def test_poa_pos():
    assert price_of_anarchy_stability(5, 1, 1) == (F(10, 9), 1)
    assert price_of_anarchy_stability(2, 1, 1) == (1, 1)
    # n=4: the interval [-2, -1] coincides with the optimal start set
    assert equilibrium_interval(4, 1, 1).lo == -2 and equilibrium_interval(4, 1, 1).hi == -1
    assert price_of_anarchy_stability(4, 1, 1) == (1, 1)
    for n in (3, 5, 6, 7, 8):
        poa, pos = price_of_anarchy_stability(n, 1, 1)
        assert poa > 1 and poa >= pos >= 1


def test_region_rows():
    rows = opt_equilibrium_region([2, 4, 10])
    assert rows == [(2, F(1, 2), F(1, 2)), (4, F(1, 4), F(3, 4)), (10, F(1, 10), F(9, 10))]


@pytest.mark.parametrize("n,b,g", [(3, 1, 1), (5, 5, 1), (4, 1, 3), (6, 2, 3)])
def test_interval_certified(n, b, g):
    iv = equilibrium_interval(n, b, g)
    sc = Scenario.base(n, b, g)
    for t in (iv.lo, iv.midpoint, iv.hi):
        assert certify_symmetric(t, sc).is_equilibrium
    for t in (iv.lo - F(1, 20), iv.hi + F(1, 20)):
        assert not certify_symmetric(t, sc).is_equilibrium
