"""Two-country New Keynesian model under the zero lower bound with calendar-based forward guidance."""

__version__ = "0.1.0"

from .model import LinearModel, build_two_country_model
from .params import CompositeCoefficients, StructuralParams, derive_composites, validate_params
from .policy import Policy, PolicySpec, Scenario, baseline_zlb_exit, irf_table, run_scenario
from .solvers import (
    DecisionRule,
    RegimeSequence,
    SimulationPath,
    simulate_with_regimes,
    solve_occbin,
    solve_reference,
    solve_stacked_newton,
)
from .welfare import WelfareWeights, bargain_grid, discounted_losses, period_losses, welfare_table

__all__ = [
    "CompositeCoefficients",
    "DecisionRule",
    "LinearModel",
    "Policy",
    "PolicySpec",
    "RegimeSequence",
    "Scenario",
    "SimulationPath",
    "StructuralParams",
    "WelfareWeights",
    "bargain_grid",
    "baseline_zlb_exit",
    "build_two_country_model",
    "derive_composites",
    "discounted_losses",
    "irf_table",
    "period_losses",
    "run_scenario",
    "simulate_with_regimes",
    "solve_occbin",
    "solve_reference",
    "solve_stacked_newton",
    "validate_params",
    "welfare_table",
]
