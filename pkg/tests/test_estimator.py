import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from breakthrough_timing import StoppingValueEstimator


@pytest.fixture(scope="module")
def fitted():
    return StoppingValueEstimator().fit()


def test_params_round_trip():
    est = StoppingValueEstimator(kappa=3.0, cost_rate=2.0)
    params = est.get_params()
    assert params["kappa"] == 3.0 and params["cost_rate"] == 2.0
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(kappa=2.5)
    assert est.kappa == 2.5


def test_predict_matches_surface(fitted, surface):
    X = np.array([[3.0, 3.0], [3.5, 9.0], [2.8, 9.0]])
    np.testing.assert_allclose(fitted.predict(X), surface.value(X[:, 0], X[:, 1]), rtol=1e-12)
    assert fitted.m_low_ == pytest.approx(surface.m_low, abs=1e-12)


def test_transform_columns(fitted):
    out = fitted.transform([[3.5, 9.0]])
    assert out.shape == (1, 4)
    assert out[0, 1] > 0 > out[0, 2]
    assert out[0, 3] == 2


def test_validation(fitted):
    with pytest.raises(NotFittedError):
        StoppingValueEstimator().predict([[1.0, 2.0]])
    with pytest.raises(ValueError):
        fitted.predict([[3.0, 2.0]])
    with pytest.raises(ValueError):
        fitted.predict([[1.0, 2.0, 3.0]])
    with pytest.raises(ValueError):
        fitted.predict([[np.nan, 2.0]])
    with pytest.raises(ValueError):
        StoppingValueEstimator(cost_family="gamma").fit()
