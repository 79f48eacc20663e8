"""Kernel pairs ``(M, N)`` for the supported SDR methods.

Every method reduces to the generalized eigenproblem ``M v = lambda N v``.
Methods written in standardized coordinates (SAVE, SIR-II, DR) build their
kernel ``M_Z`` on the Z scale and return ``S^{1/2} M_Z S^{1/2}`` with
``N = S``, so that all methods go through the same solver and the
eigenvectors come back on the original predictor scale.

SIR2 and DR also accept ``convention="table"``, which pairs ``M_Z`` itself
with ``N = S``.  The simulation harness uses that form by default because
it is the form under which eigenvalue-ordered SIR-II stays at chance level
on the reference configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import GroupMoments, group_moments
from .errors import ValidationError
from .linalg import ensure_spd, spd_inverse, spd_sqrt_and_invsqrt

METHODS = ("PCA", "SIR", "SAVE", "SIR2", "DR", "SSDR")
DEFAULT_GAMMA = 1e-6
# how SIR2 and DR carry their Z-scale kernel back to the predictor scale
Z_CONVENTIONS = ("sandwich", "table")


@dataclass(frozen=True)
class KernelSpec:
    method: str = "SIR2"
    gamma: float = DEFAULT_GAMMA
    h_count: int = 5
    force_gamma: bool = False
    pca_scatter: str = "marginal"
    z_convention: str = "sandwich"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.gamma < 0:
            raise ValidationError("gamma must be non-negative")
        if self.h_count < 2:
            raise ValidationError("h_count must be at least 2")
        if self.pca_scatter not in ("marginal", "pooled"):
            raise ValidationError("pca_scatter must be 'marginal' or 'pooled'")
        if self.z_convention not in Z_CONVENTIONS:
            raise ValidationError(f"z_convention must be one of {Z_CONVENTIONS}")


@dataclass(frozen=True)
class KernelPair:
    m: np.ndarray
    n: np.ndarray
    method: str


@dataclass(frozen=True)
class ZMoments:
    """Group moments expressed on the standardized scale."""

    priors: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    sqrt: np.ndarray
    scaling: np.ndarray


def _sym(a):
    return 0.5 * (a + a.T)


def scaling_matrix(moments, gamma=DEFAULT_GAMMA, force=False):
    """Marginal covariance, shifted by ``gamma I`` when it does not factor.

    The shift is also applied whenever ``p >= n``.
    """
    n_obs = int(moments.counts.sum())
    force = force or moments.p >= n_obs
    return ensure_spd(moments.marginal, gamma, force=force)


def z_moments(moments, gamma=DEFAULT_GAMMA, force=False):
    s = scaling_matrix(moments, gamma, force)
    root, invroot = spd_sqrt_and_invsqrt(s)
    zmeans = (moments.means - moments.grand_mean) @ invroot
    zcovs = np.einsum("ij,hjk,kl->hil", invroot, moments.covariances, invroot)
    return ZMoments(moments.priors, zmeans, zcovs, root, s)


def kernel_pca(moments, scatter="marginal"):
    """``M`` = covariance of X, ``N = I``.

    ``scatter="pooled"`` uses the prior-weighted within-group covariance
    instead of the marginal one.
    """
    m = moments.marginal if scatter == "marginal" else moments.pooled
    return KernelPair(_sym(np.array(m)), np.eye(moments.p), "PCA")


def kernel_sir(moments, gamma=DEFAULT_GAMMA, force=False):
    """Between-group covariance of the group means against the marginal covariance."""
    dev = moments.means - moments.grand_mean
    m = np.einsum("h,hi,hj->ij", moments.priors, dev, dev)
    return KernelPair(_sym(m), scaling_matrix(moments, gamma, force), "SIR")


def _to_x_scale(mz, z, convention="sandwich"):
    """``S^{1/2} M_Z S^{1/2}`` (``sandwich``) or ``M_Z`` unchanged (``table``).

    Both are paired with ``N = S``.  Only the sandwich keeps the estimated
    span affine equivariant; the unconjugated form ranks directions
    differently because ``N`` then weights them by their marginal variance.
    """
    if convention == "table":
        return _sym(np.array(mz, dtype=float))
    return _sym(z.sqrt @ _sym(mz) @ z.sqrt)


def kernel_save(moments, z=None, gamma=DEFAULT_GAMMA, force=False):
    """``S^{1/2} sum_h pi_h (I - S_{Z,h})^2 S^{1/2}`` against ``S``."""
    z = z_moments(moments, gamma, force) if z is None else z
    eye = np.eye(moments.p)
    mz = sum(pi * (eye - c) @ (eye - c) for pi, c in zip(z.priors, z.covariances))
    return KernelPair(_to_x_scale(mz, z), z.scaling, "SAVE")


def sir2_candidate(priors, zcovs):
    avg = np.einsum("h,hij->ij", priors, zcovs)
    return _sym(sum(pi * (c - avg) @ (c - avg) for pi, c in zip(priors, zcovs)))


def kernel_sir2(moments, z=None, gamma=DEFAULT_GAMMA, force=False, convention="sandwich"):
    """Dispersion of the standardized group covariances around their average."""
    z = z_moments(moments, gamma, force) if z is None else z
    mz = sir2_candidate(z.priors, z.covariances)
    return KernelPair(_to_x_scale(mz, z, convention), z.scaling, "SIR2")


def dr_candidate(priors, zmeans, zcovs):
    """Directional-regression candidate matrix on the Z scale.

    ``2 E[A_h^2] + 2 B^2 + 2 E[zbar_h' zbar_h] B - 2 I`` with
    ``A_h = S_{Z,h} + zbar_h zbar_h'`` and ``B = E[zbar_h zbar_h']``.
    """
    p = zmeans.shape[1]
    outer = np.einsum("hi,hj->hij", zmeans, zmeans)
    a = zcovs + outer
    b = np.einsum("h,hij->ij", priors, outer)
    trace_term = float(np.sum(priors * np.einsum("hi,hi->h", zmeans, zmeans)))
    mz = (
        2.0 * np.einsum("h,hij,hjk->ik", priors, a, a)
        + 2.0 * b @ b
        + 2.0 * trace_term * b
        - 2.0 * np.eye(p)
    )
    return _sym(mz)


def kernel_dr(moments, gamma=DEFAULT_GAMMA, force=False, convention="sandwich"):
    """Directional regression.

    The moments are taken with divisor ``n_h`` (and ``n`` for the scaling
    matrix) so that ``sum_h pi_h A_h = I`` holds exactly, which makes the
    candidate matrix a sum of squares and hence PSD.  Unbiased moments are
    rescaled first.
    """
    if moments.ddof != 0:
        counts = moments.counts
        n_obs = counts.sum()
        covs = moments.covariances * ((counts - moments.ddof) / counts)[:, None, None]
        marginal = moments.marginal * ((n_obs - moments.ddof) / n_obs)
        ml = GroupMoments(
            counts, moments.priors, moments.means, covs,
            np.einsum("h,hij->ij", moments.priors, covs),
            moments.grand_mean, marginal, 0, moments.labels,
        )
    else:
        ml = moments
    z = z_moments(ml, gamma, force)
    mz = dr_candidate(z.priors, z.means, z.covariances)
    return KernelPair(_to_x_scale(mz, z, convention), z.scaling, "DR")


def kernel_ssdr(moments, gamma=DEFAULT_GAMMA, force=False):
    """``C C'`` with ``C = [l_2 .. l_H | S_2 - S_1 | .. | S_H - S_1]``, ``N = I``.

    ``l_h = S_h^{-1} xbar_h - S_1^{-1} xbar_1``; each ``S_h`` is shifted by
    ``gamma I`` when it does not factor.
    """
    covs = moments.covariances
    prec = [spd_inverse(ensure_spd(c, gamma, force)) for c in covs]
    ref = prec[0] @ moments.means[0]
    lin = [prec[h] @ moments.means[h] - ref for h in range(1, moments.h_count)]
    quad = [covs[h] - covs[0] for h in range(1, moments.h_count)]
    c = np.column_stack(lin + quad)
    return KernelPair(_sym(c @ c.T), np.eye(moments.p), "SSDR")


def build_kernel(spec, x, groups):
    """Kernel pair for ``spec.method`` from raw predictors and group labels."""
    if isinstance(spec, str):
        spec = KernelSpec(method=spec)
    moments = group_moments(x, groups)
    if moments.h_count < 2 and spec.method not in ("PCA",):
        raise ValidationError(f"{spec.method} needs at least two groups")
    g, f = spec.gamma, spec.force_gamma
    if spec.method == "PCA":
        return kernel_pca(moments, spec.pca_scatter)
    if spec.method == "SIR":
        return kernel_sir(moments, g, f)
    if spec.method == "SAVE":
        return kernel_save(moments, gamma=g, force=f)
    if spec.method == "SIR2":
        return kernel_sir2(moments, gamma=g, force=f, convention=spec.z_convention)
    if spec.method == "DR":
        return kernel_dr(moments, gamma=g, force=f, convention=spec.z_convention)
    return kernel_ssdr(moments, g, f)
