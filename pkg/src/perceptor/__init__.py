"""Predict classifier accuracy from the moments of readout postsynaptic sums."""

__version__ = "0.1.0"

from .errors import InputError, NumericalError
from .stats import (ActivationSet, MomentStats, ReadoutPerceptron, SumSamples,
                    avg_correlation, compute_sums, estimate_moments)
from .theory import (PredictionReport, SharedDistractorStats, aggregate, predict,
                     predict_eq1, predict_eq2, predict_eq2_kde, predict_eq3_mc)

__all__ = [
    "ActivationSet", "InputError", "MomentStats", "NumericalError", "PredictionReport",
    "ReadoutPerceptron", "SharedDistractorStats", "SumSamples", "aggregate",
    "avg_correlation", "compute_sums", "estimate_moments", "predict", "predict_eq1",
    "predict_eq2", "predict_eq2_kde", "predict_eq3_mc",
]
