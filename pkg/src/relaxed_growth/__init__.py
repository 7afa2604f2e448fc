"""Growth-optimal trading with boundary strategies under a trade-frequency budget."""

from .baselines import BaselineResult, a_of_h, a_of_h_taylor, h_investor_growth, lambda_investor_growth
from .errors import (
    DomainError,
    InfeasibleBudgetError,
    InvalidParameterError,
    NoRootError,
    RelaxedGrowthError,
    SingularCaseError,
)
from .market import (
    CostMertonSolution,
    CostRate,
    MarketParams,
    g_flow,
    merton_fraction,
    merton_growth,
    merton_with_costs,
    rebalance_reward,
    trade_cost,
)
from .montecarlo import SimConfig, SimResult, simulate_exit, simulate_policy
from .optimizer import (
    RelaxedSolution,
    VerificationReport,
    efficiency,
    solve_relaxed,
    symmetric_solution,
    verify_explicit,
)
from .renewal import (
    BoundaryPolicy,
    RenewalSummary,
    expected_cycle_time,
    expected_exit_time,
    exit_probability_upper,
    invariant_distribution,
    policy_growth_rate,
    scale_h0,
    time_h1,
)
from .reports import efficiency_curve, h_grid, rows_to_csv, rows_to_svg

__version__ = "0.1.0"
