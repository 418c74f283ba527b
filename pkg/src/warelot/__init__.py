"""Warehouse lot scheduling: evaluators, relaxations, and sub-2 pipeline."""

from .eoq import CappedEoq, EoqParams, capped_eoq, eoq_cost, eoq_opt
from .model import (
    CapacityReport,
    Commodity,
    CommodityStats,
    CyclicPolicy,
    CyclicSchedule,
    Instance,
    PolicyCertificate,
    ScheduleInfeasibleError,
    SosiVector,
    check_capacity_feasible,
    evaluate_policy,
    hyperperiod,
    merge_policies,
    sosi_to_cyclic,
)
from .relax import (
    RelaxSolution,
    classical_two_approx,
    solve_relax_dp,
    solve_relax_exact,
    sosify,
)

__version__ = "0.1.0"
