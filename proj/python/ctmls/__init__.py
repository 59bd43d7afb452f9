"""Kapur thresholding via the chaotic bat algorithm, texture features, and
classical two-class classifiers for CT slices."""

from ctmls._core import (  # noqa: F401
    ConfigError,
    DataError,
    Model,
    apply_trilevel,
    cba_optimize,
    dwt_features,
    entropy_features,
    exhaustive_tri_threshold,
    extract_raw,
    feature_names,
    fit,
    glcm_features,
    histogram,
    hu_features,
    kapur_objective,
    load_image,
    load_model,
    lorenz_sequence,
    metrics,
    probabilities,
    resize_bilinear,
    save_pgm,
    stratified_kfold,
    synth_dataset,
    threshold_filter,
    welch_t,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Model",
    "apply_trilevel",
    "cba_optimize",
    "dwt_features",
    "entropy_features",
    "exhaustive_tri_threshold",
    "extract_raw",
    "feature_names",
    "fit",
    "glcm_features",
    "histogram",
    "hu_features",
    "kapur_objective",
    "load_image",
    "load_model",
    "lorenz_sequence",
    "metrics",
    "probabilities",
    "resize_bilinear",
    "save_pgm",
    "stratified_kfold",
    "synth_dataset",
    "threshold_filter",
    "welch_t",
]
