import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from mesonbell.errors import ValidationError
from mesonbell.estimators import ChshMaximizer, ThresholdClassifier


def test_get_set_params_roundtrip():
    est = ChshMaximizer(kind="nonunitary", t_max=6.0)
    params = est.get_params()
    assert params["kind"] == "nonunitary" and params["t_max"] == 6.0
    est.set_params(grid_points=9)
    assert clone(est).get_params()["grid_points"] == 9


def test_transform_shape_and_values():
    est = ChshMaximizer(kind="renormalized").fit([[0.77, 0.0]])
    out = est.transform(np.array([[0.77, 0.0], [2.0, 0.0]]))
    assert out.shape == (2, 5)
    np.testing.assert_allclose(out[:, 0], 2 * math.sqrt(2), atol=1e-6)
    assert np.all(out[:, 1:] >= 0) and np.all(out[:, 1:] <= 8)


def test_single_column_means_y_zero():
    est = ChshMaximizer(kind="nonunitary")
    np.testing.assert_array_equal(est.fit_transform([0.5, 3.0]), est.transform([[0.5, 0.0], [3.0, 0.0]]))


def test_predict_violation():
    est = ChshMaximizer(kind="unitary")
    np.testing.assert_array_equal(est.fit([[1]]).predict([[0.77, 0.0], [20.6, 0.0]]), [False, True])


def test_input_validation():
    est = ChshMaximizer()
    with pytest.raises(ValidationError):
        est.fit([[1.0, 2.5]])
    with pytest.raises(ValidationError):
        est.transform([[-1.0, 0.0]])
    with pytest.raises(ValidationError):
        est.transform(np.ones((2, 3)))
    with pytest.raises(ValueError):
        est.transform([[np.nan, 0.0]])


def test_in_pipeline():
    pipe = make_pipeline(ChshMaximizer(kind="nonunitary"))
    assert pipe.fit_transform([[3.0, 0.0]])[0, 0] > 2.0


def test_threshold_classifier():
    clf = ThresholdClassifier(kind="nonunitary")
    with pytest.raises(NotFittedError):
        clf.predict([1.0])
    clf.fit()
    assert 2.1 < clf.critical_x_ < 2.12
    np.testing.assert_array_equal(clf.predict([[0.77], [20.6]]), [False, True])
    assert clf.decision_function([clf.critical_x_])[0] == 0.0
    assert clf.score([[1.0], [3.0]], [False, True]) == 1.0
