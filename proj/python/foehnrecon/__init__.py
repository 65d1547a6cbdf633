"""Foehn classification, statistical learners and season-trend decomposition."""

from ._core import (
    FoehnError,
    GbtParams,
    Model,
    brier,
    em_fit,
    event_metrics,
    fit,
    fit_str,
    gbt_trace,
    hourly_label,
    lasso_path,
    posterior_from_prior,
    run_cli,
    synth,
    trend_significance,
)

__all__ = [
    "FoehnError",
    "GbtParams",
    "Model",
    "brier",
    "em_fit",
    "event_metrics",
    "fit",
    "fit_str",
    "gbt_trace",
    "hourly_label",
    "lasso_path",
    "posterior_from_prior",
    "run_cli",
    "synth",
    "trend_significance",
]
