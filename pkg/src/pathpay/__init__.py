"""Charge-and-subsidy path guidance for single origin-destination networks."""

from .network import (
    Link,
    LinkCostFn,
    Network,
    NetworkError,
    PathCountError,
    PathSet,
    enumerate_paths,
    eval_cost,
    eval_marginal,
    parse_network,
)
from .equilibrium import (
    ConvergenceError,
    FlowSolution,
    average_time,
    solve_so,
    solve_ue,
)
from .vot import (
    VotClassTable,
    VotDistribution,
    VotError,
    cdf,
    discretize,
    inverse_cdf,
    parse_vot,
)
from .simplex import LpSolution, SimplexError, StandardLp, solve_lp
from .scheme import (
    CostReport,
    Guidance,
    PipelineResult,
    SchemeError,
    SchemeOutcome,
    SubscriberAssignment,
    assign_outsider,
    assign_subscriber,
    build_outcome,
    compute_payments,
    cost_report,
    run_scheme,
    solve_subscriber_lp,
)
from .verify import (
    OracleError,
    VerificationReport,
    brute_force_lp_oracle,
    check_pareto,
    check_revenue_neutral,
    check_strategy_proof,
    greedy_weighted_cost,
    reconstruct_payments,
    run_verification,
)

__version__ = "0.1.0"

__all__ = [
    "Link",
    "LinkCostFn",
    "Network",
    "NetworkError",
    "PathCountError",
    "PathSet",
    "enumerate_paths",
    "eval_cost",
    "eval_marginal",
    "parse_network",
    "ConvergenceError",
    "FlowSolution",
    "average_time",
    "solve_so",
    "solve_ue",
    "VotClassTable",
    "VotDistribution",
    "VotError",
    "cdf",
    "discretize",
    "inverse_cdf",
    "parse_vot",
    "LpSolution",
    "SimplexError",
    "StandardLp",
    "solve_lp",
    "CostReport",
    "Guidance",
    "PipelineResult",
    "SchemeError",
    "SchemeOutcome",
    "SubscriberAssignment",
    "assign_outsider",
    "assign_subscriber",
    "build_outcome",
    "compute_payments",
    "cost_report",
    "run_scheme",
    "solve_subscriber_lp",
    "OracleError",
    "VerificationReport",
    "brute_force_lp_oracle",
    "check_pareto",
    "check_revenue_neutral",
    "check_strategy_proof",
    "greedy_weighted_cost",
    "reconstruct_payments",
    "run_verification",
    "__version__",
]
