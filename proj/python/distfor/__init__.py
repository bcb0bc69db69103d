"""Distributional regression forests for zero-censored responses.

Thin wrapper over the C++ core: censored Gaussian / logistic families,
score-based distributional trees and forests, an EMOS baseline, and a
CRPS-based evaluation toolkit.
"""

from ._core import (
    ConfigError,
    DataError,
    Dataset,
    Family,
    FitError,
    Model,
    crpss,
    dataset_from_arrays,
    family,
    fit_emos,
    fit_forest,
    fit_intercept,
    fit_mle,
    fit_tree,
    generate_scenario,
    load_csv,
    load_model,
    mean_crps,
    quantile_residuals,
    variable_importance,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "Family",
    "FitError",
    "Model",
    "crpss",
    "dataset_from_arrays",
    "family",
    "fit_emos",
    "fit_forest",
    "fit_intercept",
    "fit_mle",
    "fit_tree",
    "generate_scenario",
    "load_csv",
    "load_model",
    "mean_crps",
    "quantile_residuals",
    "variable_importance",
]

__version__ = "0.1.0"
