"""Seeded generators for the simulation configurations.

Every replicate owns an :class:`RngStream` keyed by ``(seed, index)``.  The
stream is a Philox counter-based generator; normal deviates come from the
Box-Muller transform of its uniform output, so a replicate is bit-identical
on any IEEE-754 platform and independent of how replicates are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .errors import InvalidTag, ValidationError
from .linalg import cholesky, orthonormal_basis, spd_inverse, sym_eig

CLASSIFICATION_TAGS = ("Q1", "Q2", "Q3", "L1", "L2", "L3")
REGRESSION_TAGS = ("D1", "D2", "D3")
NULL_EIG_TOL = 1e-10


class RngStream:
    """Reproducible random stream for one replicate."""

    def __init__(self, seed, index=0):
        self.seed = int(seed)
        self.index = int(index)
        self._gen = np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, self.index])))

    def uniform(self, size=None):
        """Uniform deviates on ``[0, 1)``."""
        return self._gen.random(size)

    def uniform_range(self, low, high, size=None):
        return low + (high - low) * self.uniform(size)

    def normal(self, size):
        """Standard normals by Box-Muller; consumes ``2 * ceil(count / 2)`` uniforms."""
        shape = (size,) if np.isscalar(size) else tuple(size)
        count = int(np.prod(shape))
        pairs = (count + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        r = np.sqrt(-2.0 * np.log(1.0 - u[:, 0]))  # 1 - U avoids log(0)
        angle = 2.0 * math.pi * u[:, 1]
        z = np.empty((pairs, 2))
        z[:, 0] = r * np.cos(angle)
        z[:, 1] = r * np.sin(angle)
        return z.ravel()[:count].reshape(shape)


def sample_mvn(mu, sigma, n, rng):
    """``n`` rows ``mu + L z`` with ``L L' = sigma``."""
    mu = np.asarray(mu, dtype=float)
    L = cholesky(sigma)
    z = rng.normal((n, mu.size))
    return mu + z @ L.T


@dataclass(frozen=True)
class GaussianMixtureSpec:
    priors: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    tag: str = ""
    d: int = 0
    basis: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if abs(float(np.sum(self.priors)) - 1.0) > 1e-12:
            raise ValidationError("mixture priors must sum to 1")
        for c in self.covariances:
            cholesky(c)

    @property
    def p(self):
        return self.means.shape[1]

    @property
    def h_count(self):
        return len(self.priors)

    @property
    def classifier(self):
        return "LDA" if self.tag.startswith("L") else "QDA"


@dataclass(frozen=True)
class RegressionSpec:
    tag: str
    beta: np.ndarray
    mixture: GaussianMixtureSpec
    noise_scale: float = 1.0

    @property
    def p(self):
        return self.beta.shape[0]

    @property
    def d(self):
        return self.beta.shape[1]

    @property
    def basis(self):
        return orthonormal_basis(self.beta)

    def response(self, x, eps):
        lin = x @ self.beta
        if self.tag == "D1":
            return lin[:, 0] + eps
        return lin[:, 0] * np.exp(lin[:, 1] + eps)


def compound_symmetry(p, rho, scale=1.0):
    return scale * ((1.0 - rho) * np.eye(p) + rho * np.ones((p, p)))


def autoregressive(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def block_diag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k:k + m, k:k + m] = b
        k += m
    return out


def true_basis(means, covs):
    """Orthonormal basis of the discriminant subspace of a Gaussian mixture.

    With a common covariance this is ``span{S^-1 (mu_h - mu_1)}``.  Otherwise
    the linear part ``S_h^-1 mu_h - S_1^-1 mu_1`` is joined with the
    eigenvectors of ``S_h^-1 - S_1^-1`` whose eigenvalues are not null.
    """
    prec = [spd_inverse(c) for c in covs]
    if all(np.array_equal(c, covs[0]) for c in covs[1:]):
        cols = [prec[0] @ (m - means[0]) for m in means[1:]]
    else:
        cols = [prec[h] @ means[h] - prec[0] @ means[0] for h in range(1, len(means))]
        for h in range(1, len(means)):
            vals, vecs = sym_eig(prec[h] - prec[0])
            scale = max(np.abs(vals).max(), 1.0)
            keep = np.abs(vals) > NULL_EIG_TOL * scale
            cols.extend(vecs[:, keep].T)
    return orthonormal_basis(np.column_stack(cols))


def _two_class(tag, mu1, mu2, s1, s2, d_expected=None):
    means = np.array([mu1, mu2], dtype=float)
    covs = np.array([s1, s2], dtype=float)
    basis = true_basis(means, covs)
    if d_expected is not None and basis.shape[1] != d_expected:
        raise ValidationError(f"{tag}: constructed basis has dimension {basis.shape[1]}, expected {d_expected}")
    return GaussianMixtureSpec(np.array([0.5, 0.5]), means, covs, tag, basis.shape[1], basis)


def _q2_like(tag, p, b, rho=0.99):
    mu2 = np.zeros(p)
    mu2[:5], mu2[5:10] = 1.0, -1.0
    block = rho * np.eye(b) + (1.0 - rho) * (np.ones((b, b)) - np.eye(b))
    s2 = block_diag(block, np.eye(p - b)) if p > b else block
    return _two_class(tag, np.zeros(p), mu2, np.eye(p), s2)


def make_config(tag, p=50, rng=None):
    """Gaussian mixture for a classification configuration.

    Q1 draws its second mean from ``rng``; the others are fixed.
    """
    tag = tag.upper()
    if tag not in CLASSIFICATION_TAGS:
        raise InvalidTag(f"unknown configuration {tag!r}; choose from {CLASSIFICATION_TAGS}")
    if tag in ("Q2", "L3") and p < (20 if tag == "L3" else 10):
        raise ValidationError(f"{tag} needs a larger p")
    if tag == "Q1":
        if rng is None:
            raise ValidationError("Q1 draws its mean vector and needs an RngStream")
        mu2 = rng.normal(p)
        s2 = block_diag(np.array([[3.0, -2.0], [-2.0, 3.0]]), np.eye(p - 2))
        return _two_class(tag, np.zeros(p), mu2, np.eye(p), s2, 2)
    if tag == "Q2":
        return _q2_like(tag, p, 5)
    if tag == "L3":
        return _q2_like(tag, p, 20)
    if tag == "Q3":
        s = np.diag(np.r_[np.full(p - 1, 2.0), 1.0])
        mu2 = np.zeros(p)
        mu2[-1] = 1.0
        return _two_class(tag, np.zeros(p), mu2, s, s, 1)
    if tag == "L1":
        s = compound_symmetry(p, 0.25)
        return _two_class(tag, np.zeros(p), np.ones(p), s, s, 1)
    # L2
    mu1 = np.zeros(p)
    mu1[:2] = 1.0
    s = block_diag(np.eye(2), compound_symmetry(p - 2, 0.99, 10.0))
    return _two_class(tag, mu1, -mu1, s, s, 1)


def make_regression(tag, p=50, rng=None, noise_scale=1.0):
    tag = tag.upper()
    if tag not in REGRESSION_TAGS:
        raise InvalidTag(f"unknown configuration {tag!r}; choose from {REGRESSION_TAGS}")
    if rng is None:
        raise ValidationError("regression configurations draw coefficients and need an RngStream")
    if tag == "D1":
        beta = rng.normal(p)[:, None]
    else:
        if p < 30:
            raise ValidationError(f"{tag} needs p >= 30")
        b1 = np.zeros(p)
        b2 = np.zeros(p)
        b1[:30] = rng.uniform_range(0.3, 0.6, 30)
        b2[:15] = rng.uniform_range(0.3, 0.6, 15)
        b2[15:30] = -rng.uniform_range(0.3, 0.6, 15)
        beta = np.column_stack([b1, b2])
    if tag == "D3":
        mu1 = np.zeros(p)
        mu1[:30] = -1.0
        mixture = GaussianMixtureSpec(
            np.array([0.4, 0.2, 0.4]),
            np.array([mu1, np.zeros(p), -mu1]),
            np.array([autoregressive(p, 0.1), autoregressive(p, 0.5), autoregressive(p, 0.9)]),
            tag,
        )
    else:
        mixture = GaussianMixtureSpec(np.array([1.0]), np.zeros((1, p)), autoregressive(p, 0.5)[None], tag)
    return RegressionSpec(tag, beta, mixture, noise_scale)


def illustrative_spec(alpha=5.0, eps=2.0):
    """Two classes sharing ``diag(3, 2, 1)``; class 1 is shifted by ``(0, eps, alpha)``."""
    s = np.diag([3.0, 2.0, 1.0])
    return _two_class("ILLUSTRATIVE", np.array([0.0, eps, alpha]), np.zeros(3), s, s)


def sample_mixture(spec, n, rng):
    """``n`` rows from a mixture; component memberships are drawn first."""
    if spec.h_count == 1:
        return sample_mvn(spec.means[0], spec.covariances[0], n, rng), np.ones(n, dtype=int)
    comp = np.searchsorted(np.cumsum(spec.priors)[:-1], rng.uniform(n), side="right") + 1
    x = np.empty((n, spec.p))
    for h in range(1, spec.h_count + 1):
        rows = np.flatnonzero(comp == h)
        if rows.size:
            x[rows] = sample_mvn(spec.means[h - 1], spec.covariances[h - 1], rows.size, rng)
    return x, comp


def generate(spec, n, rng):
    """Draw a dataset.

    For a classification spec ``n`` is the per-class size (an int or one
    size per class) and rows come grouped by class.  For a regression spec
    ``n`` is the total size and the response is continuous.
    """
    if isinstance(spec, RegressionSpec):
        n = int(n)
        x, _ = sample_mixture(spec.mixture, n, rng)
        eps = spec.noise_scale * rng.normal(n)
        return LabeledDataset(x, spec.response(x, eps), "continuous")
    sizes = np.broadcast_to(np.asarray(n, dtype=int), (spec.h_count,))
    if np.any(sizes < 0):
        raise ValidationError("class sizes must be non-negative")
    xs, ys = [], []
    for h, nh in enumerate(sizes, start=1):
        xs.append(sample_mvn(spec.means[h - 1], spec.covariances[h - 1], int(nh), rng))
        ys.append(np.full(int(nh), h))
    kind = "binary" if spec.h_count == 2 else "categorical"
    return LabeledDataset(np.vstack(xs), np.concatenate(ys), kind)
