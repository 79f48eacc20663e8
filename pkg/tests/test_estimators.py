import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline

from conftest import two_class_data
from sdrorder import GaussianDiscriminant, OrderedSDR
from sdrorder.errors import ValidationError


def test_fit_transform_shapes(rng):
    x, y = two_class_data(rng)
    sdr = OrderedSDR(method="SAVE", n_components=2).fit(x, y)
    assert sdr.components_.shape == (4, 2)
    assert sdr.transform(x).shape == (400, 2)
    assert sdr.criterion_ == "T" and sdr.response_kind_ == "binary"
    assert sorted(sdr.ranks_.tolist()) == sorted(sdr.scores_.ranks.tolist())


def test_string_labels_and_multiclass(rng):
    x = rng.normal(size=(90, 3))
    y = np.repeat(["a", "b", "c"], 30)
    x[y == "b", 0] += 2
    sdr = OrderedSDR(method="SIR").fit(x, y)
    assert sdr.criterion_ == "F" and sdr.response_kind_ == "categorical"
    with pytest.raises(ValidationError):
        OrderedSDR(criterion="T").fit(x, y)


def test_continuous_response(rng):
    x = rng.normal(size=(200, 3))
    y = 2 * x[:, 2] + 0.1 * rng.normal(size=200)
    sdr = OrderedSDR(method="SIR", n_slices=5).fit(x, y)
    assert sdr.response_kind_ == "continuous"
    v = sdr.components_[:, 0] / np.linalg.norm(sdr.components_[:, 0])
    assert abs(v[2]) > 0.95


def test_pipeline_and_clone(rng):
    x, y = two_class_data(rng)
    pipe = make_pipeline(OrderedSDR(method="PCA", n_components=1), GaussianDiscriminant("QDA"))
    scores = cross_val_score(pipe, x, y, cv=3)
    assert scores.mean() > 0.7
    twin = clone(pipe)
    assert twin.get_params()["orderedsdr__method"] == "PCA"
    assert not hasattr(twin.steps[0][1], "components_")


def test_classifier_predicts_original_labels(rng):
    x, y = two_class_data(rng)
    labels = np.where(y == 1, "neg", "pos")
    clf = GaussianDiscriminant("LDA").fit(x, labels)
    assert set(clf.predict(x)) <= {"neg", "pos"}
    assert clf.decision_function(x).shape == (400, 2)
    assert clf.score(x, labels) > 0.7


def test_parameter_errors(rng):
    x, y = two_class_data(rng, n=20)
    with pytest.raises(ValidationError):
        OrderedSDR(method="LASSO").fit(x, y)
    with pytest.raises(ValidationError):
        OrderedSDR(n_components=9).fit(x, y)
    with pytest.raises(ValidationError):
        OrderedSDR(response="ordinal").fit(x, y)


def test_transform_checks_width(rng):
    x, y = two_class_data(rng, n=20)
    sdr = OrderedSDR().fit(x, y)
    with pytest.raises(ValueError):
        sdr.transform(x[:, :3])
