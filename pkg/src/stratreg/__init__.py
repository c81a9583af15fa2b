"""Sequential assessment games with strategic effort.

A principal scores an agent over T rounds with per-round weight vectors over
observable features; the agent allocates effort across actions that convert
linearly to features, with a diagonal fraction carrying over into future
rounds.  The package computes agent best responses, decides incentivizability
of effort policies through a domination linear program, recovers assessment
policies from the dual, optimizes the principal's policy (simulated annealing
over the incentivizable set, exhaustive grids, and a quadratic-cost closed
form), and evaluates closed-form horizon bounds.
"""

from .agent import (
    BestResponse,
    GuardExceeded,
    agent_brute_force_oracle,
    best_response_fixed_budget,
    best_response_quadratic,
)
from .bounds import (
    HorizonBound,
    InfeasibleCarryOver,
    effort_level_horizon,
    implementability_horizon,
    quadratic_reachable,
)
from .core import (
    AssessmentPolicy,
    CostModel,
    EffortPolicy,
    GameParams,
    Trajectory,
    ValidationReport,
    coefficient_vectors,
    simulate_trajectory,
    validate_params,
)
from .figures import (
    FigureDataset,
    classroom_dataset,
    omega_sweep_dataset,
    regions_dataset,
    render_png,
    write_csv,
)
from .incentives import (
    MembershipOracle,
    MembershipVerdict,
    RecoveredAssessment,
    ValidationFailed,
    domination_lp,
    membership,
    recover_assessment,
)
from .lp import LpProblem, LpSolution, LpStatus, NumericalFailure, solve_lp
from .principal import (
    AnnealConfig,
    Diagnostics,
    MembershipOracleFailure,
    OuterRadius,
    QuadraticSolution,
    SolveMethod,
    SolveResult,
    initial_point,
    outer_radius,
    simplex_grid,
    solve_fixed_budget_anneal,
    solve_fixed_budget_grid,
    solve_quadratic,
)
from .scenario import (
    ParseError,
    Scenario,
    SolverSettings,
    ValidationError,
    bundled_scenario_names,
    bundled_scenario_path,
    parse_scenario,
    parse_scenario_text,
    serialize_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig",
    "AssessmentPolicy",
    "BestResponse",
    "CostModel",
    "Diagnostics",
    "EffortPolicy",
    "FigureDataset",
    "GameParams",
    "GuardExceeded",
    "HorizonBound",
    "InfeasibleCarryOver",
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "MembershipOracle",
    "MembershipOracleFailure",
    "MembershipVerdict",
    "NumericalFailure",
    "OuterRadius",
    "ParseError",
    "QuadraticSolution",
    "RecoveredAssessment",
    "Scenario",
    "SolveMethod",
    "SolveResult",
    "SolverSettings",
    "Trajectory",
    "ValidationError",
    "ValidationFailed",
    "ValidationReport",
    "agent_brute_force_oracle",
    "best_response_fixed_budget",
    "best_response_quadratic",
    "bundled_scenario_names",
    "bundled_scenario_path",
    "classroom_dataset",
    "coefficient_vectors",
    "domination_lp",
    "effort_level_horizon",
    "implementability_horizon",
    "initial_point",
    "membership",
    "omega_sweep_dataset",
    "outer_radius",
    "parse_scenario",
    "parse_scenario_text",
    "quadratic_reachable",
    "recover_assessment",
    "regions_dataset",
    "render_png",
    "serialize_scenario",
    "simplex_grid",
    "simulate_trajectory",
    "solve_fixed_budget_anneal",
    "solve_fixed_budget_grid",
    "solve_lp",
    "solve_quadratic",
    "validate_params",
    "write_csv",
]
