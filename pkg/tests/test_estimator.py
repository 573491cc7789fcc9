import numpy as np
import pytest
from sklearn.base import clone

from zonoest import SetMembershipEstimator
from zonoest.scenario import load_scenario, simulate_truth


@pytest.fixture(scope="module")
def data():
    sc = load_scenario("example1").with_overrides(steps=4)
    states, ys = simulate_truth(sc.model(), sc)
    return sc, states, ys


def test_fit_predict_contains(data):
    sc, states, ys = data
    est = SetMembershipEstimator("example1", sc.X0, sc.W, sc.V, method="D-CZ").fit(ys)
    assert len(est.records_) == 4 and est.n_features_in_ == 2
    mid = est.predict()
    lo, hi = est.predict_interval()
    assert mid.shape == (4, 2) and np.all(lo <= mid) and np.all(mid <= hi)
    assert np.all(lo <= states + 1e-9) and np.all(states <= hi + 1e-9)
    assert est.contains(states).all() and est.score(states) == 1.0


def test_comb_estimator_and_clone(data):
    sc, states, ys = data
    est = SetMembershipEstimator(X0=sc.X0, W=sc.W, V=sc.V, method="COMB")
    twin = clone(est)
    assert twin.get_params()["method"] == "COMB"
    twin.fit(ys)
    assert all(r.method.value == "COMB" for r in twin.records_)
    assert twin.score(states) == 1.0


def test_input_validation(data):
    sc, states, ys = data
    with pytest.raises(ValueError):
        SetMembershipEstimator(X0=sc.X0, W=sc.W, V=sc.V).fit(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        SetMembershipEstimator(X0=None, W=sc.W, V=sc.V).fit(ys)
    est = SetMembershipEstimator(X0=sc.X0, W=sc.W, V=sc.V).fit(ys)
    with pytest.raises(ValueError):
        est.contains(states[:2])
