"""Estimate the number of Gaussian mixture components by centred singular
value thresholding."""
from .estimator import EstimateReport, ThresholdSpec, csvt, raw_count, threshold
from .spectral import (
    SpectrumResult,
    centered_gram,
    column_mean,
    singular_values,
    singular_values_centered,
    spectral_norm,
)

__all__ = [
    "EstimateReport",
    "SpectrumResult",
    "ThresholdSpec",
    "centered_gram",
    "column_mean",
    "csvt",
    "raw_count",
    "singular_values",
    "singular_values_centered",
    "spectral_norm",
    "threshold",
]
__version__ = "0.1.0"
