import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import two_class_data
from sdrorder.errors import DimensionTooLarge, GroupTooSmall, NotBinary, ShapeMismatch, ValidationError
from sdrorder.kernels import KernelSpec, build_kernel
from sdrorder.linalg import GevBasis, gev_solve
from sdrorder.ordering import (
    CriterionScores,
    f_scores,
    population_snr,
    population_f_ratio,
    project,
    rank_order,
    reorder_and_truncate,
    score,
    t_scores,
    write_scores_csv,
)
from sdrorder.simgen import RngStream, generate, illustrative_spec


def test_rank_order_examples():
    assert rank_order([0.5, 2.0, 1.0]).tolist() == [3, 1, 2]
    assert rank_order([1.0, 1.0, 0.0]).tolist() == [1, 1, 3]
    with pytest.raises(ValidationError):
        rank_order([np.nan, 1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=30))
def test_rank_order_properties(values):
    theta = np.array(values)
    r = rank_order(theta)
    assert r.min() == 1 and r.max() <= theta.size
    # doubling is exact in floating point and strictly increasing
    assert np.array_equal(rank_order(2.0 * theta), r)
    scores = CriterionScores.from_scores("T", theta)
    assert np.all(np.diff(theta[scores.permutation]) <= 0)


def test_ties_keep_eigen_index_order():
    scores = CriterionScores.from_scores("T", [1.0, 2.0, 1.0, 2.0])
    assert scores.permutation.tolist() == [1, 3, 0, 2]


def test_t_and_f_on_known_projection():
    x = np.array([[0.0], [2.0], [4.0], [6.0]])
    y = np.array([1, 1, 2, 2])
    v = np.eye(1)
    # gap 4, each group variance 2
    assert t_scores(v, x, y)[0] == pytest.approx(4.0 / np.sqrt(2.0))
    assert f_scores(v, x, y)[0] == pytest.approx(4.0 / 2.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(5, 60), st.integers(5, 60))
def test_f_is_scaled_square_of_t(seed, n1, n2):
    r = np.random.default_rng(seed)
    x = np.vstack([r.normal(size=(n1, 4)), r.normal(size=(n2, 4)) + r.normal(size=4)])
    y = np.repeat([1, 2], [n1, n2])
    v = r.normal(size=(4, 4))
    t = t_scores(v, x, y)
    f = f_scores(v, x, y)
    p1, p2 = n1 / (n1 + n2), n2 / (n1 + n2)
    np.testing.assert_allclose(f, p1 * p2 * t**2, rtol=1e-10, atol=1e-12)
    assert np.array_equal(rank_order(f), rank_order(t))


def test_scores_invariant_to_direction_scale(rng):
    x, y = two_class_data(rng)
    v = rng.normal(size=(4, 3))
    np.testing.assert_allclose(t_scores(v * [2.0, -3.0, 0.5], x, y), t_scores(v, x, y), rtol=1e-12)


def test_zero_variance_directions(caplog):
    x = np.array([[0.0, 1.0], [0.0, 2.0], [1.0, 3.0], [1.0, 5.0]])
    y = np.array([1, 1, 2, 2])
    t = t_scores(np.array([[1.0], [0.0]]), x, y)
    assert t[0] == np.inf
    same = np.array([[1.0, 0.0], [1.0, 1.0], [1.0, 2.0], [1.0, 3.0]])
    assert t_scores(np.array([[1.0], [0.0]]), same, y)[0] == 0.0
    assert "zero within-group variance" in caplog.text


def test_criterion_errors(rng):
    x, y = two_class_data(rng, n=10)
    with pytest.raises(NotBinary):
        t_scores(np.eye(4), x, np.r_[y[:-1], 3])
    with pytest.raises(GroupTooSmall):
        t_scores(np.eye(4), x[:11], y[:11])
    with pytest.raises(ValidationError):
        score(gev_solve(np.eye(4), np.eye(4)), "BOGUS", x, y)


def test_illustrative_population_snr():
    spec = illustrative_spec(alpha=5.0, eps=2.0)
    snr = population_snr(spec, np.eye(3))
    np.testing.assert_allclose(snr.scores, [0.0, np.sqrt(2.0), 5.0], atol=1e-12)
    assert snr.ranks.tolist() == [3, 2, 1]


def test_population_f_ratio_relation_to_snr():
    spec = illustrative_spec(alpha=1.2, eps=1.0)
    v = np.random.default_rng(3).normal(size=(3, 3))
    ratio = population_f_ratio(spec, v).scores
    snr = population_snr(spec, v).scores
    np.testing.assert_allclose(ratio, 0.25 * snr**2, rtol=1e-12)


def test_illustrative_reordering_puts_smallest_eigenvalue_first():
    spec = illustrative_spec()
    data = generate(spec, 1000, RngStream(5, 0))
    pair = build_kernel(KernelSpec("PCA", pca_scatter="pooled"), data.x, data.y)
    basis = gev_solve(pair.m, pair.n)
    by_t = score(basis, "T", data.x, data.y)
    by_eig = score(basis, "EIGENVALUE")
    assert by_eig.ranks.tolist() == [1, 2, 3]
    assert by_t.ranks.tolist() == [3, 2, 1]
    reduced = reorder_and_truncate(basis, by_t, 1, "PCA")
    assert reduced.indices.tolist() == [2]
    np.testing.assert_allclose(np.abs(reduced.columns[:, 0]), [0, 0, 1], atol=0.05)


def test_reorder_and_project_errors():
    basis = GevBasis(np.array([2.0, 1.0]), np.eye(2))
    scores = CriterionScores.from_scores("T", [0.1, 0.9])
    with pytest.raises(DimensionTooLarge):
        reorder_and_truncate(basis, scores, 3)
    reduced = reorder_and_truncate(basis, scores, 2)
    assert reduced.indices.tolist() == [1, 0]
    np.testing.assert_array_equal(project(reduced, np.array([[1.0, 2.0]])), [[2.0, 1.0]])
    with pytest.raises(ShapeMismatch):
        project(reduced, np.ones((2, 3)))


def test_scores_csv(tmp_path):
    basis = GevBasis(np.array([2.0, 1.0]), np.eye(2))
    write_scores_csv(tmp_path / "s.csv", basis, CriterionScores.from_scores("T", [0.5, 3.0]))
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines == ["direction_index,eigenvalue,score,rank", "1,2,0.5,2", "2,1,3,1"]


def test_two_group_sir_and_t_agree(rng):
    # SIR has one non-null direction for two groups; T gives it rank 1 and
    # scores the null directions at zero, so both orderings coincide
    x, y = two_class_data(rng)
    pair = build_kernel("SIR", x, y)
    basis = gev_solve(pair.m, pair.n)
    t = score(basis, "T", x, y)
    assert t.ranks[0] == 1
    np.testing.assert_allclose(t.scores[1:], 0.0, atol=1e-8)
    assert np.all(np.abs(basis.values[1:]) < 1e-10)
