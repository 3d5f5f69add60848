"""Energy-distance two-sample tests for incomplete data.

Samples are float arrays of shape (rows, columns); NaN marks a missing value.
"""

from ._core import (
    EnergyError,
    NoCompleteCasesError,
    NumericError,
    ValidationError,
    apply_missingness,
    calibrate,
    distance,
    impute,
    integral_oracle,
    pairwise,
    procedures,
    sample,
    simulate,
    statistic,
    test,
)

__all__ = [
    "EnergyError",
    "NoCompleteCasesError",
    "NumericError",
    "ValidationError",
    "apply_missingness",
    "calibrate",
    "distance",
    "impute",
    "integral_oracle",
    "pairwise",
    "procedures",
    "sample",
    "simulate",
    "statistic",
    "test",
]
