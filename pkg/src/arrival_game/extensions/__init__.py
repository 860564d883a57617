"""Variations on the base game: availability windows, waiting costs,
random service times, random populations and heterogeneous customers."""
from .availability import WaitingResult, max_waiting_rate, restricted_equilibrium, waiting_cost_interval
from .heterogeneous import TauI, heterogeneous_interval, ordered_linear_interval, ratio_bounds, tau_i
from .population import (
    PositionPmf,
    RandomPopulationResult,
    poisson_opt_equilibrium_boundary,
    position_pmf,
    random_pop_interval,
)
from .stochastic import (
    erlang_tail,
    exponential_equilibrium_interval,
    exponential_late_cost,
    exponential_symmetric_cost,
    two_point_service_equilibrium,
)
