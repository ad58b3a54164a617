"""Optimal investment timing when a better technology may arrive.

Solves the free boundary of the two-dimensional stopping problem in the state
and its running maximum, builds the value surface on top of it, and checks
both against Monte Carlo estimates.
"""

from .boundary import BoundaryError, FreeBoundary, SolverSettings, classify_trajectory, find_endpoint
from .checks import run_checks
from .diffusion import DiffusionModel, DomainError, GbmParams, apply_generator, gbm_model, hitting_laplace
from .estimator import StoppingValueEstimator
from .law import CostLaw, ThresholdLaw, hazard_order_dominates, threshold_law_from_costs
from .montecarlo import (SimConfig, SimResult, StoppingPolicy, maximum_integral_check,
                         simulate_game_value, simulate_stopped_value)
from .payoffs import TechnologyPayoffs, drift_term_L, nash_split, shapley_split, solve_standalone
from .problem import Problem
from .statics import compare_cost_laws, compare_payoffs
from .value import REGION_NAMES, ValueSurface

__version__ = "0.1.0"

__all__ = [
    "BoundaryError", "CostLaw", "DiffusionModel", "DomainError", "FreeBoundary", "GbmParams",
    "Problem", "REGION_NAMES", "SimConfig", "SimResult", "SolverSettings", "StoppingPolicy",
    "StoppingValueEstimator", "TechnologyPayoffs", "ThresholdLaw", "ValueSurface",
    "apply_generator", "classify_trajectory", "compare_cost_laws", "compare_payoffs",
    "drift_term_L", "find_endpoint", "gbm_model", "hazard_order_dominates", "hitting_laplace",
    "maximum_integral_check", "nash_split", "run_checks", "shapley_split",
    "simulate_game_value", "simulate_stopped_value", "solve_standalone",
    "threshold_law_from_costs",
]
