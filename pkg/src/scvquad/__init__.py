"""Stratified control-variates quadrature on the unit cube.

Randomized numerical integration with per-subcube polynomial control
variates and stratified residual sampling, the classical comparison
methods sharing the same interpolant, and a statistics layer that
measures the error achieved at a prescribed confidence level.
"""

from .estimators import (
    BudgetError,
    EstimateRun,
    EstimatorConfig,
    Method,
    classical_cv,
    crude_mc,
    cv_mom,
    run,
    scv,
    stratified,
    subdivisions_for_budget,
)
from .grid import (
    NodeSet,
    SubcubeIndex,
    UnisolvenceError,
    poly_dim,
    regular_nodes,
    shifted_nodes,
    subcube_indices,
    subcube_map,
    subcube_unmap,
)
from .interp import InterpolationError, PolyPatch, interpolate, patch_mean, residual_eval
from .stats import (
    ErrorSample,
    RateFit,
    fit_rate,
    histogram,
    prob_error,
    replicate,
    tail_fraction,
    verify_hoeffding_p,
    verify_mz,
)
from .testbed import BumpSpec, Integrand, bump, corner_bump, random_poly, test_function_2d

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "BumpSpec",
    "ErrorSample",
    "EstimateRun",
    "EstimatorConfig",
    "Integrand",
    "InterpolationError",
    "Method",
    "NodeSet",
    "PolyPatch",
    "RateFit",
    "SubcubeIndex",
    "UnisolvenceError",
    "bump",
    "classical_cv",
    "corner_bump",
    "crude_mc",
    "cv_mom",
    "fit_rate",
    "histogram",
    "interpolate",
    "patch_mean",
    "poly_dim",
    "prob_error",
    "random_poly",
    "regular_nodes",
    "replicate",
    "residual_eval",
    "run",
    "scv",
    "shifted_nodes",
    "stratified",
    "subcube_indices",
    "subcube_map",
    "subcube_unmap",
    "subdivisions_for_budget",
    "tail_fraction",
    "test_function_2d",
    "verify_hoeffding_p",
    "verify_mz",
]
