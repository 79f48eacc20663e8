"""Coordinate-free distance between column spans."""

from __future__ import annotations

import math

import numpy as np

from .errors import DimensionMismatch
from .linalg import projection_matrix


def _as_basis(b):
    b = np.asarray(getattr(b, "columns", b), dtype=float)
    return b[:, None] if b.ndim == 1 else b


def subspace_distance(truth, estimate):
    """``||P_truth - P_estimate||_F / sqrt(2 d)``.

    Equals 0 for identical spans and 1 for orthogonal ones; for two lines at
    angle ``theta`` it is ``sin(theta)``.
    """
    a, b = _as_basis(truth), _as_basis(estimate)
    if a.shape != b.shape:
        raise DimensionMismatch(f"bases have shapes {a.shape} and {b.shape}")
    diff = projection_matrix(a) - projection_matrix(b)
    dist = np.linalg.norm(diff) / math.sqrt(2.0 * a.shape[1])
    return float(min(dist, 1.0))
