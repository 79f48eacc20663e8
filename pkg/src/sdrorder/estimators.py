"""scikit-learn compatible wrappers around the functional core."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.multiclass import type_of_target
from sklearn.utils.validation import check_is_fitted, validate_data

from .data import encode_labels, slice_continuous
from .discriminant import DEFAULT_GAMMA, discriminant_scores, fit_classifier
from .errors import ValidationError
from .kernels import METHODS, KernelSpec, build_kernel
from .linalg import gev_solve
from .ordering import project, reorder_and_truncate, score


class OrderedSDR(TransformerMixin, BaseEstimator):
    """Dimension reduction whose directions are ranked by a chosen criterion.

    The method's generalized eigenproblem is solved once on the training
    data; the directions are then scored (eigenvalue magnitude, ``T`` or
    ``F``) and the ``n_components`` best-ranked ones are kept.

    Parameters
    ----------
    method : {"PCA", "SIR", "SAVE", "SIR2", "DR", "SSDR"}
    criterion : {"auto", "EIGENVALUE", "T", "F"}
        ``auto`` picks ``T`` for a binary response and ``F`` otherwise.
    n_components : int
    n_slices : int
        Slices used when the response is continuous.
    gamma : float
        Tikhonov shift used when a covariance does not factor.
    response : {"auto", "binary", "categorical", "continuous"}
    force_gamma : bool
    pca_scatter : {"marginal", "pooled"}
        Scatter used as the PCA kernel: the marginal covariance or the
        prior-weighted within-group covariance.
    z_convention : {"sandwich", "table"}
        How SIR2 and DR map their standardized kernel back to ``X``.

    Attributes
    ----------
    components_ : ndarray of shape (n_features, n_components)
    basis_ : GevBasis
    scores_ : CriterionScores
    eigenvalues_, ranks_ : ndarray of shape (n_features,)
    """

    def __init__(self, method="SIR2", criterion="auto", n_components=1, n_slices=5,
                 gamma=DEFAULT_GAMMA, response="auto", force_gamma=False, pca_scatter="marginal",
                 z_convention="sandwich"):
        self.method = method
        self.criterion = criterion
        self.n_components = n_components
        self.n_slices = n_slices
        self.gamma = gamma
        self.response = response
        self.force_gamma = force_gamma
        self.pca_scatter = pca_scatter
        self.z_convention = z_convention

    def _response_kind(self, y):
        if self.response != "auto":
            if self.response not in ("binary", "categorical", "continuous"):
                raise ValidationError(f"response must be auto/binary/categorical/continuous, got {self.response!r}")
            return self.response
        target = type_of_target(y)
        if target == "binary":
            return "binary"
        if target == "multiclass":
            return "categorical"
        if target == "continuous":
            return "continuous"
        raise ValidationError(f"unsupported target type {target!r}")

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=False, ensure_min_samples=4)
        if str(self.method).upper() not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}")
        kind = self._response_kind(y)
        if kind == "continuous":
            groups = slice_continuous(np.asarray(y, dtype=float), self.n_slices)
        else:
            groups, _ = encode_labels(y)
        crit = str(self.criterion).upper()
        if crit == "AUTO":
            crit = "T" if kind == "binary" else "F"
        if crit == "T" and kind != "binary":
            raise ValidationError("criterion T needs a binary response")
        if not 1 <= int(self.n_components) <= X.shape[1]:
            raise ValidationError(f"n_components must lie in 1..{X.shape[1]}")
        spec = KernelSpec(str(self.method).upper(), self.gamma, self.n_slices,
                          bool(self.force_gamma), self.pca_scatter, self.z_convention)
        pair = build_kernel(spec, X, groups)
        self.basis_ = gev_solve(pair.m, pair.n)
        self.scores_ = score(self.basis_, crit, X, groups)
        self.reduced_ = reorder_and_truncate(self.basis_, self.scores_, int(self.n_components), spec.method)
        self.components_ = self.reduced_.columns
        self.eigenvalues_ = self.basis_.values
        self.ranks_ = self.scores_.ranks
        self.criterion_ = crit
        self.response_kind_ = kind
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = validate_data(self, X, reset=False)
        return project(self.reduced_, X)


class GaussianDiscriminant(ClassifierMixin, BaseEstimator):
    """Plug-in Gaussian classifier (``kind="LDA"`` or ``"QDA"``)."""

    def __init__(self, kind="QDA", gamma=DEFAULT_GAMMA):
        self.kind = kind
        self.gamma = gamma

    def fit(self, X, y):
        X, y = validate_data(self, X, y)
        self.classes_, codes = np.unique(y, return_inverse=True)
        self.model_ = fit_classifier(self.kind, X, codes + 1, self.gamma)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = validate_data(self, X, reset=False)
        return discriminant_scores(self.model_, X)

    def predict(self, X):
        scores = self.decision_function(X)
        return self.classes_[np.argmax(scores, axis=1)]
