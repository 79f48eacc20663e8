"""Scoring and reordering of generalized-eigenvalue directions.

A direction is scored either by its eigenvalue magnitude (the classical
convention) or by how well it separates the response groups once the data
are projected onto it:

* ``T``: absolute two-sample mean gap over the prior-weighted pooled
  standard deviation (binary response).
* ``F``: prior-weighted between-group variance of the projected means over
  the prior-weighted within-group variance (any number of groups, including
  slices of a continuous response).

``SNR`` and ``F_RATIO`` are the population counterparts computed from a known
Gaussian mixture.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .data import group_labels
from .errors import DimensionTooLarge, GroupTooSmall, NotBinary, ShapeMismatch, ValidationError

log = logging.getLogger(__name__)

CRITERIA = ("EIGENVALUE", "T", "F", "SNR", "F_RATIO")
_ZERO_RTOL = 1e-12


def rank_order(theta):
    """``r_j = #{i : theta_i > theta_j} + 1``; tied entries share a rank."""
    theta = np.asarray(theta, dtype=float).ravel()
    if np.isnan(theta).any():
        raise ValidationError("scores must not contain NaN")
    return (theta[None, :] > theta[:, None]).sum(axis=1) + 1


@dataclass(frozen=True)
class CriterionScores:
    criterion: str
    scores: np.ndarray
    ranks: np.ndarray
    permutation: np.ndarray

    @classmethod
    def from_scores(cls, criterion, scores):
        scores = np.asarray(scores, dtype=float)
        ranks = rank_order(scores)
        # ties fall back to the original eigen index
        perm = np.argsort(ranks, kind="stable")
        return cls(criterion, scores, ranks, perm)


@dataclass(frozen=True)
class ReducedBasis:
    columns: np.ndarray
    indices: np.ndarray
    method: str
    criterion: str

    @property
    def d(self):
        return self.columns.shape[1]


def _vectors(basis):
    return getattr(basis, "vectors", basis)


def score_eigenvalue(basis):
    return CriterionScores.from_scores("EIGENVALUE", np.abs(basis.values))


def _separation_ratio(num, den, scale):
    """Ratio with explicit handling of directions that have no within-group spread."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.empty_like(num)
    degenerate = den <= (_ZERO_RTOL * scale) ** 2
    ok = ~degenerate
    out[ok] = num[ok] / den[ok]
    if degenerate.any():
        gap = num[degenerate] > (_ZERO_RTOL * scale[degenerate]) ** 2
        out[degenerate] = np.where(gap, np.inf, 0.0)
        log.warning(
            "%d direction(s) with zero within-group variance (%d scored +inf, %d scored 0)",
            degenerate.sum(), gap.sum(), (~gap).sum(),
        )
    return out


def _projected_moments(vectors, x, labels):
    proj = np.asarray(x, dtype=float) @ vectors
    codes = np.unique(labels)
    means, variances, counts = [], [], []
    for h in codes:
        ph = proj[labels == h]
        if ph.shape[0] < 2:
            raise GroupTooSmall(f"group {h} has {ph.shape[0]} observation(s)")
        means.append(ph.mean(axis=0))
        variances.append(ph.var(axis=0, ddof=1))
        counts.append(ph.shape[0])
    counts = np.array(counts, dtype=float)
    scale = np.abs(proj).max(axis=0) if proj.size else np.zeros(vectors.shape[1])
    return np.array(means), np.array(variances), counts / counts.sum(), scale


def t_scores(vectors, x, y):
    labels = np.asarray(y)
    if np.unique(labels).size != 2:
        raise NotBinary(f"T criterion needs exactly two classes, got {np.unique(labels).size}")
    means, var, pri, scale = _projected_moments(vectors, x, labels)
    gap2 = (means[1] - means[0]) ** 2
    den = pri[1] * var[1] + pri[0] * var[0]
    return np.sqrt(_separation_ratio(gap2, den, scale))


def f_scores(vectors, x, groups):
    labels = group_labels(groups)
    if np.unique(labels).size < 2:
        raise ValidationError("F criterion needs at least two groups")
    means, var, pri, scale = _projected_moments(vectors, x, labels)
    centre = pri @ means
    between = pri @ (means - centre) ** 2
    within = pri @ var
    return _separation_ratio(between, within, scale)


def score_t(basis, x, y):
    """Sample signal-to-noise score of every direction for a binary response."""
    return CriterionScores.from_scores("T", t_scores(_vectors(basis), x, y))


def score_f(basis, x, groups):
    """Between/within variance ratio of every direction over ``groups``."""
    return CriterionScores.from_scores("F", f_scores(_vectors(basis), x, groups))


def _mixture_parts(spec):
    return np.asarray(spec.priors), np.asarray(spec.means), np.asarray(spec.covariances)


def population_snr(spec, vectors):
    """Projected population SNR of each column of ``vectors`` (two classes)."""
    priors, means, covs = _mixture_parts(spec)
    if len(priors) != 2:
        raise NotBinary("population SNR is defined for two classes")
    v = np.asarray(_vectors(vectors), dtype=float)
    gap = np.abs(v.T @ (means[1] - means[0]))
    var = priors[1] * np.einsum("ij,ik,kj->j", v, covs[1], v) + priors[0] * np.einsum(
        "ij,ik,kj->j", v, covs[0], v
    )
    return CriterionScores.from_scores("SNR", gap / np.sqrt(var))


def population_f_ratio(spec, vectors):
    """Population between/within variance ratio of each column of ``vectors``."""
    priors, means, covs = _mixture_parts(spec)
    v = np.asarray(_vectors(vectors), dtype=float)
    pm = means @ v
    centre = priors @ pm
    between = priors @ (pm - centre) ** 2
    within = sum(pi * np.einsum("ij,ik,kj->j", v, c, v) for pi, c in zip(priors, covs))
    return CriterionScores.from_scores("F_RATIO", between / within)


def score(basis, criterion, x=None, groups=None):
    """Dispatch on criterion name (``EIGENVALUE``, ``T`` or ``F``)."""
    criterion = criterion.upper()
    if criterion == "EIGENVALUE":
        return score_eigenvalue(basis)
    if criterion == "T":
        return score_t(basis, x, group_labels(groups))
    if criterion == "F":
        return score_f(basis, x, groups)
    raise ValidationError(f"unknown sample criterion {criterion!r}")


def reorder_and_truncate(basis, scores, d, method=""):
    vectors = _vectors(basis)
    p = vectors.shape[1]
    if not 1 <= d <= p:
        raise DimensionTooLarge(f"d={d} must lie in 1..{p}")
    idx = np.asarray(scores.permutation[:d])
    return ReducedBasis(vectors[:, idx], idx, method, scores.criterion)


def project(reduced, x):
    x = np.asarray(x, dtype=float)
    columns = getattr(reduced, "columns", reduced)
    if x.ndim != 2 or x.shape[1] != columns.shape[0]:
        raise ShapeMismatch(f"data has shape {x.shape}, basis expects {columns.shape[0]} columns")
    return x @ columns


def write_scores_csv(path, basis, scores):
    """Columns: direction_index (1-based), eigenvalue, score, rank."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["direction_index", "eigenvalue", "score", "rank"])
        for j, (lam, s, r) in enumerate(zip(basis.values, scores.scores, scores.ranks), start=1):
            w.writerow([j, format(float(lam), ".17g"), format(float(s), ".17g"), int(r)])
