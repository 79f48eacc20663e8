"""Sufficient dimension reduction with criterion-ordered directions."""

__version__ = "0.1.0"

from .discriminant import GaussianClassifier, OerInputs1D, cer, fit_classifier, oer_1d, oer_lda_full, predict
from .errors import NumericalError, SdrError, ValidationError
from .kernels import METHODS, KernelPair, KernelSpec, build_kernel
from .linalg import GevBasis, gev_solve
from .metrics import subspace_distance
from .ordering import (
    CriterionScores,
    ReducedBasis,
    population_snr,
    population_f_ratio,
    project,
    rank_order,
    reorder_and_truncate,
    score_eigenvalue,
    score_f,
    score_t,
)
from .estimators import GaussianDiscriminant, OrderedSDR

__all__ = [
    "CriterionScores",
    "GaussianClassifier",
    "GaussianDiscriminant",
    "GevBasis",
    "KernelPair",
    "KernelSpec",
    "METHODS",
    "NumericalError",
    "OerInputs1D",
    "OrderedSDR",
    "ReducedBasis",
    "SdrError",
    "ValidationError",
    "build_kernel",
    "cer",
    "fit_classifier",
    "gev_solve",
    "oer_1d",
    "oer_lda_full",
    "population_snr",
    "population_f_ratio",
    "predict",
    "project",
    "rank_order",
    "reorder_and_truncate",
    "score_eigenvalue",
    "score_f",
    "score_t",
    "subspace_distance",
]
