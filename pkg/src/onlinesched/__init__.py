"""Online scheduling for total weighted completion time via geometric intervals.

Pluggable minimum-unscheduled-weight solvers pick what runs in each interval
and release-free offline schedulers order it, for concurrent open shop,
coflow and concurrent cluster instances.
"""
from .framework import (
    IntervalSequence, OnlineResult, deterministic_grid, eta_grid, interval_start_of,
    randomized_grid, run_online, theorem_bound,
)
from .model import (
    ClusterInstance, CoflowInstance, CosInstance, Schedule, cluster_aggregates,
    coflow_to_cos, cos_batch_makespan, objective, parse_instance, validate,
)
from .muwp import (
    MuwpSolution, MuwpSolver, exact_muwp, knapsack_muwp_fixed_m, lp_round_muwp_cluster,
    lp_round_muwp_cos,
)
from .offline import (
    OfflineScheduler, build_permutation_schedule, dp_optimal_cos, greedy_2approx_cos,
    list_schedule_cluster, offline_cluster_schedule, offline_coflow_schedule,
)

__all__ = [
    "ClusterInstance", "CoflowInstance", "CosInstance", "IntervalSequence", "MuwpSolution",
    "MuwpSolver", "OfflineScheduler", "OnlineResult", "Schedule", "build_permutation_schedule",
    "cluster_aggregates", "coflow_to_cos", "cos_batch_makespan", "deterministic_grid",
    "dp_optimal_cos", "eta_grid", "exact_muwp", "greedy_2approx_cos", "interval_start_of",
    "knapsack_muwp_fixed_m", "list_schedule_cluster", "lp_round_muwp_cluster", "lp_round_muwp_cos",
    "objective", "offline_cluster_schedule", "offline_coflow_schedule", "parse_instance",
    "randomized_grid", "run_online", "theorem_bound", "validate",
]
