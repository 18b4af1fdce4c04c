"""Python access to the ufslab core: suppression, selection, metrics and runs."""

from ._core import (
    METRICS_HEADER,
    ContractError,
    DimensionError,
    IoError,
    NumericError,
    ParseError,
    StateError,
    apply_suppression,
    classify_mode,
    compute_ratio,
    compute_suppression,
    frechet_distance,
    instance_select,
    manifold_metrics,
    mode_coverage,
    random_feature_embed,
    read_checkpoint,
    run_experiment,
    select_indices,
    suppression_for,
)

__all__ = [
    "METRICS_HEADER",
    "ContractError",
    "DimensionError",
    "IoError",
    "NumericError",
    "ParseError",
    "StateError",
    "apply_suppression",
    "classify_mode",
    "compute_ratio",
    "compute_suppression",
    "frechet_distance",
    "instance_select",
    "manifold_metrics",
    "mode_coverage",
    "random_feature_embed",
    "read_checkpoint",
    "run_experiment",
    "select_indices",
    "suppression_for",
]
