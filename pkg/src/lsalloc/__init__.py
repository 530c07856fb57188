"""Local search allocation of balls into bins on graphs."""

from .alloc import (
    InvariantViolation,
    LoadVector,
    RunRecord,
    WeightFn,
    local_search_step,
    run_coupon_collector,
    run_d_choice,
    run_local_search,
    run_one_choice,
    run_poissonized,
)
from .graph import Graph
from .growth import compute_r1, compute_r1_gamma, compute_r2, compute_r2_gamma, growth_report
from .rng import RngPlan

__version__ = "0.1.0"
