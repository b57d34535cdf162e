"""Optimal risk-averse asset-sale timing under GBM and exponential-OU dynamics."""

from ._optsale import (
    ExponentialUtility,
    GbmParams,
    LogUtility,
    McConfig,
    McEstimate,
    NumericalError,
    OuEigenParams,
    PowerUtility,
    ProblemSpec,
    Solution,
    SweepResult,
    UsageError,
    ValidationError,
    XouParams,
    bracket_lower,
    classify_strategy,
    compute_alpha,
    eval_F,
    eval_G,
    mc_strategy_value,
    smooth_pasting_audit,
    solve,
    threshold_sweep,
    vi_residual_grid,
)

__all__ = [
    "ExponentialUtility",
    "GbmParams",
    "LogUtility",
    "McConfig",
    "McEstimate",
    "NumericalError",
    "OuEigenParams",
    "PowerUtility",
    "ProblemSpec",
    "Solution",
    "SweepResult",
    "UsageError",
    "ValidationError",
    "XouParams",
    "bracket_lower",
    "classify_strategy",
    "compute_alpha",
    "eval_F",
    "eval_G",
    "mc_strategy_value",
    "smooth_pasting_audit",
    "solve",
    "threshold_sweep",
    "vi_residual_grid",
]
