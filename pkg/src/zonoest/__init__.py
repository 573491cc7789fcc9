"""Guaranteed state estimation for nonlinear discrete-time systems with zonotopic sets."""
from .estimator import SetMembershipEstimator
from .filter import MethodId, StepRecord, run_estimators
from .interval import Interval, IntervalMatrix, IntervalVector
from .model import SystemModel, get_model
from .scenario import Scenario, load_scenario
from .sets import ConstrainedZonotope, HPolytope, SetEnclosure, Zonotope, ZonotopeBundle

__version__ = "0.1.0"

__all__ = [
    "ConstrainedZonotope",
    "HPolytope",
    "Interval",
    "IntervalMatrix",
    "IntervalVector",
    "MethodId",
    "Scenario",
    "SetEnclosure",
    "SetMembershipEstimator",
    "StepRecord",
    "SystemModel",
    "Zonotope",
    "ZonotopeBundle",
    "get_model",
    "load_scenario",
    "run_estimators",
]
