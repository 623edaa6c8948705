import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from conformal_mass import BlowupMassEstimator, GreenFunctionSolver
from conformal_mass.blowup import FIELD_NAMES


def test_params_roundtrip():
    est = GreenFunctionSolver(n=512, order=10)
    assert est.get_params()["n"] == 512
    c = clone(est)
    assert c.get_params() == est.get_params()
    c.set_params(order=8)
    assert c.order == 8 and est.order == 10


def test_not_fitted():
    with pytest.raises(NotFittedError):
        GreenFunctionSolver().predict([0.5])


def test_fit_predict_round():
    est = GreenFunctionSolver(n=512).fit("round-s4")
    r = np.array([0.3, 1.0, 2.5])
    assert np.allclose(est.predict(r), 1 / (4 * np.sin(r / 2) ** 2), rtol=1e-9)
    assert est.A_ == pytest.approx(1 / 12, abs=1e-9)
    assert est.kappa_ == 0


def test_transform_shape():
    est = GreenFunctionSolver(n=256).fit("fs-cp2")
    X = est.transform(np.linspace(0.1, 2.0, 7))
    assert X.shape == (7, len(FIELD_NAMES))
    assert list(est.get_feature_names_out()) == list(FIELD_NAMES)
    with pytest.raises(ValueError):
        est.predict([math.pi])  # beyond L = pi/sqrt2
    with pytest.raises(TypeError):
        GreenFunctionSolver().fit(3.0)


def test_mass_estimator():
    est = BlowupMassEstimator(n=1024).fit("fs-cp2")
    assert est.predict() == pytest.approx(1.0, abs=1e-6)
    assert est.report_.route_spread < 1e-3
