"""scikit-learn style wrapper around the recursive set-membership estimators."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .filter import EstimatorConfig, MethodId, StepRecord, run_estimators
from .model import SystemModel, get_model
from .sets import ConstrainedZonotope, interval_hull


class SetMembershipEstimator(BaseEstimator):
    """Guaranteed state enclosures from a measurement sequence.

    Parameters
    ----------
    model : str or SystemModel, default="example1"
        Built-in model name or a model instance.
    X0, W, V : ConstrainedZonotope
        Initial-state set, disturbance set and measurement-noise set.
    method : str, default="D-CZ"
        One of ``RRSR``, ``D-RRSR``, ``D-ZB``, ``D-CZ``, ``COMB``.
    family : str, default="canonical"
        Decomposition family strategy (``canonical``, ``canonical+K``, ``exhaustive``).
    model_params : dict, optional
        Parameters for a built-in model.
    seed : int, default=0
        Seed for random family members.

    Attributes
    ----------
    records_ : list of StepRecord
        One record per step, ``k = 0`` being the initial set.
    hulls_ : list of IntervalVector
        Interval hull of each updated set.
    """

    def __init__(self, model="example1", X0=None, W=None, V=None, method="D-CZ", family="canonical",
                 model_params=None, seed=0):
        self.model = model
        self.X0 = X0
        self.W = W
        self.V = V
        self.method = method
        self.family = family
        self.model_params = model_params
        self.seed = seed

    def _model(self) -> SystemModel:
        if isinstance(self.model, SystemModel):
            return self.model
        return get_model(self.model, self.model_params)

    def fit(self, Y, y=None):
        """Run the estimator over measurements ``Y`` of shape ``(n_steps, n_outputs)``."""
        model = self._model()
        Y = check_array(Y, ensure_min_samples=0, dtype=float)
        if Y.shape[0] and Y.shape[1] != model.nmu:
            raise ValueError(f"expected {model.nmu} measurement columns, got {Y.shape[1]}")
        for name in ("X0", "W", "V"):
            if not isinstance(getattr(self, name), ConstrainedZonotope):
                raise ValueError(f"{name} must be a zonotope or constrained zonotope")
        method = MethodId.parse(self.method)
        methods = (MethodId.RRSR, MethodId.D_RRSR, MethodId.D_ZB, MethodId.D_CZ, method) \
            if method is MethodId.COMB else (method,)
        cfg = EstimatorConfig(strategy=self.family, seed=self.seed)
        records = run_estimators(model, self.X0, self.W, self.V, list(Y), methods, cfg)
        self.records_: list[StepRecord] = [r for r in records if r.method is method]
        self.hulls_ = [None if r.updated is None else interval_hull(r.updated) for r in self.records_]
        self.n_features_in_ = model.nmu
        return self

    def predict(self, Y=None):
        """Interval-hull midpoints of the updated sets, shape ``(n_steps + 1, nx)``.

        With ``Y`` the estimator is refitted on it first.
        """
        if Y is not None:
            self.fit(Y)
        check_is_fitted(self, "records_")
        nx = self._model().nx
        return np.array([np.full(nx, np.nan) if h is None else h.mid for h in self.hulls_])

    def predict_interval(self):
        """Lower and upper interval-hull bounds, each of shape ``(n_steps + 1, nx)``."""
        check_is_fitted(self, "records_")
        nx = self._model().nx
        lo = np.array([np.full(nx, np.nan) if h is None else h.lo for h in self.hulls_])
        hi = np.array([np.full(nx, np.nan) if h is None else h.hi for h in self.hulls_])
        return lo, hi

    def contains(self, X):
        """Whether each row ``X[k]`` lies in the ``k``-th updated set."""
        check_is_fitted(self, "records_")
        X = check_array(X, dtype=float)
        if len(X) != len(self.records_):
            raise ValueError(f"expected {len(self.records_)} states, got {len(X)}")
        return np.array([r.updated is not None and r.updated.contains(x) for r, x in zip(self.records_, X)])

    def score(self, X, y=None):
        """Fraction of the states ``X`` contained in their step's updated set."""
        return float(self.contains(X).mean())
