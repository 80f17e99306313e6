"""Multi-sector equilibrium simulation with Bayesian technology learning.

Firms choose labor each period under a clipped point estimate of their own
returns to scale, a market-clearing wage coordinates their demands with the
household labor supply, and realized production feeds a truncated posterior
update of the estimate.  The package provides the market-clearing solver,
both long- and short-memory update rules, closed-form moment analysis of the
estimator, a multi-input elasticity-learning extension, and a reproducible
Monte Carlo engine with a CLI.
"""

__version__ = "0.1.0"

from .beliefs import (
    BeliefState,
    UnifiedWeights,
    clamp_belief,
    initial_belief,
    pd_update,
    pi_update,
    rule_of_thumb_probability,
    unified_step,
)
from .engine import EnsembleStats, TrajectoryResult, mean_field_trajectory, run_ensemble, run_trajectory
from .equilibrium import (
    DemandCoefficients,
    EquilibriumOutcome,
    SolverError,
    aggregate_labor_demand,
    clear_period,
    labor_bounds_thresholds,
    labor_demand,
    solve_wage,
    solve_wage_endogenous,
)
from .highdim import (
    ElasticityParams,
    ElasticityState,
    FirmElasticity,
    IdentifiabilityError,
    build_signal,
    hd_map_update,
    limit_diagonal_check,
    sherman_morrison_step,
)
from .model import (
    ConfigError,
    EconomyConfig,
    Schedule,
    SectorParams,
    ShockDraw,
    ShockStream,
    lognormal_moment,
    mean_productivity,
    shock_stream,
)
from .moments import (
    LimitDescriptor,
    MomentReport,
    mean_field_labor_path,
    mode_sequence_pi,
    pd_limit_expectation,
    pd_mode,
    pd_moments,
    pi_limit_expectation,
    pi_mode,
    pi_moments,
)
from .scenarios import SCENARIO_NAMES, scenario

__all__ = [
    "__version__",
    "BeliefState",
    "ConfigError",
    "DemandCoefficients",
    "EconomyConfig",
    "ElasticityParams",
    "ElasticityState",
    "EnsembleStats",
    "EquilibriumOutcome",
    "FirmElasticity",
    "IdentifiabilityError",
    "LimitDescriptor",
    "MomentReport",
    "SCENARIO_NAMES",
    "Schedule",
    "SectorParams",
    "ShockDraw",
    "ShockStream",
    "SolverError",
    "TrajectoryResult",
    "UnifiedWeights",
    "aggregate_labor_demand",
    "build_signal",
    "clamp_belief",
    "clear_period",
    "hd_map_update",
    "initial_belief",
    "labor_bounds_thresholds",
    "labor_demand",
    "limit_diagonal_check",
    "lognormal_moment",
    "mean_field_labor_path",
    "mean_field_trajectory",
    "mean_productivity",
    "mode_sequence_pi",
    "pd_limit_expectation",
    "pd_mode",
    "pd_moments",
    "pd_update",
    "pi_limit_expectation",
    "pi_mode",
    "pi_moments",
    "pi_update",
    "rule_of_thumb_probability",
    "run_ensemble",
    "run_trajectory",
    "scenario",
    "shock_stream",
    "sherman_morrison_step",
    "solve_wage",
    "solve_wage_endogenous",
    "unified_step",
]
