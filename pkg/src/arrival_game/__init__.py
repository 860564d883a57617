"""Equilibrium arrival times for customers sharing a single FCFS server."""
from .core import (
    ArrivalProfile,
    AssumptionViolation,
    ConsistencyError,
    DeviationCost,
    InputError,
    PopulationModel,
    ProblemSizeError,
    Scenario,
    ServiceSchedule,
    ServiceTimeModel,
    UnsupportedConfiguration,
    deviation_cost,
    expected_profile_cost,
    fcfs_schedule,
)
from .equilibrium import (
    BestResponse,
    EquilibriumInterval,
    best_response_two,
    deviation_cost_landscape,
    equilibrium_interval,
    is_social_opt_equilibrium,
    opt_equilibrium_region,
    price_of_anarchy_stability,
    symmetric_cost,
)
from .oracle import Certification, asymmetric_scan, certify_symmetric, mc_profile_cost, mc_symmetric_cost
from .social import SocialOptimum, social_optimum_heterogeneous, social_optimum_homogeneous, total_cost_of_start

__version__ = "0.1.0"
