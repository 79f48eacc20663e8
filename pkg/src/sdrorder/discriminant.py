"""Plug-in Gaussian classifiers and closed-form Bayes error rates."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import EmptyTestSet, InvalidSigma, ShapeMismatch, SingleClass, ValidationError
from .kernels import DEFAULT_GAMMA
from .linalg import cholesky, ensure_spd, spd_inverse

log = logging.getLogger(__name__)

KINDS = ("LDA", "QDA")
EQUAL_SIGMA_RTOL = 1e-10


@dataclass(frozen=True)
class GaussianClassifier:
    kind: str
    labels: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    covariances: np.ndarray  # one per class; all identical for LDA
    precisions: np.ndarray
    logdets: np.ndarray
    gamma: float
    shared: bool

    @property
    def dim(self):
        return self.means.shape[1]

    def to_dict(self):
        return {
            "kind": self.kind,
            "labels": self.labels.tolist(),
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "covariances": self.covariances.tolist(),
            "gamma": self.gamma,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc):
        return _build(
            doc["kind"],
            np.asarray(doc["labels"]),
            np.asarray(doc["priors"], dtype=float),
            np.asarray(doc["means"], dtype=float),
            np.asarray(doc["covariances"], dtype=float),
            float(doc["gamma"]),
        )


def _build(kind, labels, priors, means, covs, gamma):
    precisions, logdets = [], []
    for c in covs:
        L = cholesky(c)
        logdets.append(2.0 * np.sum(np.log(np.diag(L))))
        precisions.append(spd_inverse(c))
    shared = bool(np.all(covs == covs[0]))
    return GaussianClassifier(
        kind, labels, priors, means, covs, np.array(precisions), np.array(logdets), gamma, shared
    )


def fit_classifier(kind, x, y, gamma=DEFAULT_GAMMA):
    """Plug-in LDA or QDA.

    Class covariances use divisor ``n_h - 1``.  LDA pools them with the
    class proportions as weights.  A covariance that fails to factor is
    shifted by ``gamma * I``.
    """
    kind = kind.upper()
    if kind not in KINDS:
        raise ValidationError(f"classifier must be one of {KINDS}, got {kind!r}")
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    y = np.asarray(y)
    if y.shape != (x.shape[0],):
        raise ShapeMismatch("labels must have one entry per row")
    labels = np.unique(y)
    if labels.size < 2:
        raise SingleClass("need at least two classes to fit a classifier")
    counts, means, covs = [], [], []
    for h in labels:
        xh = x[y == h]
        if xh.shape[0] < 2:
            raise ValidationError(f"class {h} has fewer than two training rows")
        counts.append(xh.shape[0])
        means.append(xh.mean(axis=0))
        covs.append(np.atleast_2d(np.cov(xh, rowvar=False, ddof=1)))
    counts = np.array(counts, dtype=float)
    priors = counts / counts.sum()
    covs = np.array(covs)
    if kind == "LDA":
        pooled = ensure_spd(np.einsum("h,hij->ij", priors, covs), gamma)
        covs = np.repeat(pooled[None], labels.size, axis=0)
    else:
        covs = np.array([ensure_spd(c, gamma) for c in covs])
    return _build(kind, labels, priors, np.array(means), covs, gamma)


def discriminant_scores(c, x):
    """Per-class scores ``log pi_h - 0.5 log|S_h| - 0.5 (x - m_h)' S_h^-1 (x - m_h)``.

    When every class shares one covariance the terms common to all classes
    are dropped, which leaves the linear rule.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None] if c.dim == 1 else x[None, :]
    if x.shape[1] != c.dim:
        raise ShapeMismatch(f"classifier expects {c.dim} columns, got {x.shape[1]}")
    if c.shared:
        prec = c.precisions[0]
        lin = c.means @ prec
        const = np.log(c.priors) - 0.5 * np.einsum("hi,hi->h", lin, c.means)
        return x @ lin.T + const
    out = np.empty((x.shape[0], c.labels.size))
    for h in range(c.labels.size):
        dev = x - c.means[h]
        mahal = np.einsum("ij,jk,ik->i", dev, c.precisions[h], dev)
        out[:, h] = np.log(c.priors[h]) - 0.5 * c.logdets[h] - 0.5 * mahal
    return out


def predict(c, x):
    """Argmax of the discriminant scores; exact ties go to the smallest label."""
    return c.labels[np.argmax(discriminant_scores(c, x), axis=1)]


def cer(c, x, y):
    y = np.asarray(y)
    if y.size == 0:
        raise EmptyTestSet("test set is empty")
    return float(np.mean(predict(c, x) != y))


def oer_lda_full(mu1, mu2, sigma):
    """Bayes error of two equal-prior Gaussians sharing ``sigma``."""
    gap = np.atleast_1d(np.asarray(mu2, dtype=float) - np.asarray(mu1, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    mahal2 = float(gap @ spd_inverse(sigma) @ gap)
    return float(ndtr(-0.5 * math.sqrt(max(mahal2, 0.0))))


@dataclass(frozen=True)
class OerInputs1D:
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        for s in (self.sigma1, self.sigma2):
            if not (np.isfinite(s) and s > 0):
                raise InvalidSigma(f"standard deviations must be positive and finite, got {s}")


def oer_1d(inputs):
    """Bayes error of two equal-prior univariate Gaussians.

    With unequal spreads the optimal rule picks class 1 on an interval
    around ``mu1`` (labels swapped so that ``sigma2 > sigma1``).  The error
    is then half the class-1 mass outside that interval plus half the
    class-2 mass inside it.
    """
    m1, m2, s1, s2 = inputs.mu1, inputs.mu2, inputs.sigma1, inputs.sigma2
    if abs(s1 - s2) <= EQUAL_SIGMA_RTOL * max(s1, s2):
        return float(ndtr(-0.5 * abs(m2 - m1) / (0.5 * (s1 + s2))))
    if s1 > s2:
        m1, m2, s1, s2 = m2, m1, s2, s1
    gap = m2 - m1
    dv = s2 * s2 - s1 * s1
    tau = math.sqrt(gap * gap + dv * math.log((s2 * s2) / (s1 * s1)))
    # interval endpoints relative to mu1 are (-s1^2 gap -/+ s1 s2 tau) / dv
    a = (s1 * gap - s2 * tau) / dv
    b = (s1 * gap + s2 * tau) / dv
    c = (s2 * gap + s1 * tau) / dv
    d = (s2 * gap - s1 * tau) / dv
    val = 0.5 + 0.5 * ndtr(a) - 0.5 * ndtr(b) + 0.5 * ndtr(c) - 0.5 * ndtr(d)
    return float(min(max(val, 0.0), 0.5))


def mc_oer_oracle(inputs, samples=10**7, seed=0, chunk=10**6):
    """Monte Carlo Bayes error: half the draws from each class, density comparison.

    Returns ``(estimate, standard_error)``.
    """
    if samples < 2:
        raise ValidationError("need at least two samples")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x0E12])))
    m = (inputs.mu1, inputs.mu2)
    s = (inputs.sigma1, inputs.sigma2)
    half = samples // 2
    wrong = 0
    for cls in (0, 1):
        left = half if cls == 0 else samples - half
        while left > 0:
            k = min(chunk, left)
            x = m[cls] + s[cls] * rng.standard_normal(k)
            ll1 = -np.log(s[0]) - 0.5 * ((x - m[0]) / s[0]) ** 2
            ll2 = -np.log(s[1]) - 0.5 * ((x - m[1]) / s[1]) ** 2
            pick2 = ll2 > ll1
            wrong += int(np.count_nonzero(pick2 if cls == 0 else ~pick2))
            left -= k
    est = wrong / samples
    return est, math.sqrt(est * (1.0 - est) / samples)
