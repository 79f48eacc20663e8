import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_spd, two_class_data
from sdrorder.data import group_moments, slice_continuous
from sdrorder.errors import ValidationError
from sdrorder.kernels import (
    KernelSpec,
    build_kernel,
    dr_candidate,
    kernel_dr,
    kernel_sir2,
    sir2_candidate,
    z_moments,
)
from sdrorder.linalg import gev_solve, is_spd
from sdrorder.metrics import subspace_distance


def three_group_data(rng, n=150, p=5):
    groups = np.repeat([1, 2, 3], n)
    x = rng.normal(size=(3 * n, p))
    x[groups == 2, 0] += 1.0
    x[groups == 3, 1] *= 2.5
    x[groups == 3, 2] -= 0.7
    return x, groups


def test_pca_marginal_is_sample_covariance(rng):
    x, y = two_class_data(rng)
    pair = build_kernel("PCA", x, y)
    np.testing.assert_allclose(pair.m, np.cov(x.T), atol=1e-12)
    np.testing.assert_array_equal(pair.n, np.eye(x.shape[1]))


def test_pca_pooled_is_within_group_covariance(rng):
    x, y = two_class_data(rng)
    pair = build_kernel(KernelSpec("PCA", pca_scatter="pooled"), x, y)
    within = 0.5 * (np.cov(x[y == 1].T) + np.cov(x[y == 2].T))
    np.testing.assert_allclose(pair.m, within, atol=1e-12)


def test_sir_kernel_rank_is_at_most_groups_minus_one(rng):
    x, g = three_group_data(rng)
    pair = build_kernel("SIR", x, g)
    vals = np.linalg.eigvalsh(pair.m)
    assert np.sum(vals > 1e-10 * vals.max()) == 2
    np.testing.assert_allclose(pair.n, np.cov(x.T), atol=1e-12)


@pytest.mark.parametrize("method", ["PCA", "SIR", "SAVE", "SIR2", "DR", "SSDR"])
def test_kernels_are_symmetric_psd(rng, method):
    x, g = three_group_data(rng)
    pair = build_kernel(method, x, g)
    np.testing.assert_array_equal(pair.m, pair.m.T)
    assert np.linalg.eigvalsh(pair.m).min() >= -1e-10 * max(1.0, np.abs(pair.m).max())
    assert is_spd(pair.n)


def test_dr_candidate_matches_pairwise_oracle(rng):
    x, g = three_group_data(rng, n=80, p=4)
    z = z_moments(group_moments(x, g, ddof=0))
    eye = np.eye(4)
    second = z.covariances + np.einsum("hi,hj->hij", z.means, z.means)
    oracle = np.zeros((4, 4))
    for h in range(3):
        for k in range(3):
            cross = np.outer(z.means[h], z.means[k])
            e = 2 * eye - (second[h] + second[k] - cross - cross.T)
            oracle += z.priors[h] * z.priors[k] * e @ e
    np.testing.assert_allclose(dr_candidate(z.priors, z.means, z.covariances), oracle, atol=1e-12)


def test_sir2_vanishes_for_equal_covariances():
    covs = np.array([np.eye(3), np.eye(3)])
    assert np.abs(sir2_candidate(np.array([0.5, 0.5]), covs)).max() == 0.0


def test_table_convention_keeps_z_kernel(rng):
    x, g = three_group_data(rng)
    m = group_moments(x, g)
    z = z_moments(m)
    table = kernel_sir2(m, z, convention="table")
    sandwich = kernel_sir2(m, z)
    np.testing.assert_allclose(table.m, sir2_candidate(z.priors, z.covariances), atol=1e-14)
    np.testing.assert_allclose(sandwich.m, z.sqrt @ table.m @ z.sqrt, atol=1e-10)
    np.testing.assert_array_equal(table.n, sandwich.n)
    assert kernel_dr(m, convention="table").m.shape == (5, 5)


@pytest.mark.parametrize("method", ["SIR", "SAVE", "SIR2", "DR"])
def test_affine_equivariance(rng, method):
    x, g = three_group_data(rng)
    a = random_spd(rng, 5) + rng.normal(size=(5, 5)) * 0.3
    shift = rng.normal(size=5)
    base = gev_solve(*_pair(method, x, g))
    moved = gev_solve(*_pair(method, x @ a + shift, g))
    np.testing.assert_allclose(moved.values, base.values, rtol=1e-7, atol=1e-10)
    # directions act on predictors, so they transform with the inverse map
    mapped = np.linalg.solve(a, base.vectors[:, :2])
    assert subspace_distance(mapped, moved.vectors[:, :2]) < 1e-6


def _pair(method, x, g):
    pair = build_kernel(method, x, g)
    return pair.m, pair.n


def test_continuous_response_uses_slices(rng):
    x = rng.normal(size=(300, 4))
    y = x[:, 0] + 0.1 * rng.normal(size=300)
    slices = slice_continuous(y, 6)
    basis = gev_solve(*_pair("SIR", x, slices))
    top = basis.vectors[:, 0] / np.linalg.norm(basis.vectors[:, 0])
    assert abs(top[0]) > 0.95


def test_singular_covariance_triggers_shift(rng):
    x = rng.normal(size=(40, 3))
    x = np.column_stack([x, x[:, 0]])
    g = np.repeat([1, 2], 20)
    pair = build_kernel("SIR", x, g)
    assert is_spd(pair.n)
    np.testing.assert_allclose(pair.n - np.cov(x.T), 1e-6 * np.eye(4), atol=1e-12)


def test_kernel_spec_validation():
    with pytest.raises(ValidationError):
        KernelSpec("LDA")
    with pytest.raises(ValidationError):
        KernelSpec("PCA", pca_scatter="weird")
    with pytest.raises(ValidationError):
        KernelSpec("SIR2", z_convention="other")
    with pytest.raises(ValidationError):
        KernelSpec("SIR", gamma=-1.0)


def test_single_group_rejected(rng):
    with pytest.raises(ValidationError):
        build_kernel("SIR", rng.normal(size=(10, 2)), np.ones(10, dtype=int))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_sir2_kernel_invariant_to_row_order(seed):
    r = np.random.default_rng(seed)
    x, g = three_group_data(r, n=30, p=3)
    perm = r.permutation(len(g))
    a = build_kernel("SIR2", x, g).m
    b = build_kernel("SIR2", x[perm], g[perm]).m
    np.testing.assert_allclose(a, b, atol=1e-10 * max(1.0, np.abs(a).max()))
