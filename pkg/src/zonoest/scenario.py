"""Scenario files, truth simulation and the sampled containment oracle.

Scenario files are JSON objects::

    {
      "model": "example1",            # built-in model name
      "model_params": {},             # forwarded to the model factory
      "landmarks": [[-2, 0], [2, 2]], # unicycle only, merged into model_params
      "X0": <set>, "W": <set>, "V": <set>,
      "x0": [0.55, 0.55],             # optional fixed true initial state
      "steps": 5,                     # records k = 0 .. steps-1
      "seed": 0,
      "methods": ["RRSR", "D-RRSR", "D-ZB", "D-CZ", "COMB"],
      "family": "canonical",          # or "canonical+K", "exhaustive"
      "samples": 10000,               # containment and volume samples
      "polygon_directions": 64
    }

``<set>`` is ``{"type": "zonotope", "G": [[...]], "c": [...]}``,
``{"type": "czonotope", "G", "c", "A", "b"}`` or ``{"type": "box", "lo", "hi"}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .exceptions import ModelNotFound, ParseError, RejectionBudgetExceeded
from .filter import ALL_METHODS, MethodId
from .mixmono import parse_strategy
from .model import MODELS, SystemModel, get_model
from .sets import ConstrainedZonotope, set_from_dict

BUILTIN_SCENARIOS = ("example1", "unicycle")


@dataclass
class Scenario:
    model_name: str
    X0: ConstrainedZonotope
    W: ConstrainedZonotope
    V: ConstrainedZonotope
    model_params: dict = field(default_factory=dict)
    steps: int = 5
    seed: int = 0
    methods: tuple = ALL_METHODS
    family: str = "canonical"
    samples: int = 10000
    polygon_directions: int = 64
    x0: np.ndarray | None = None
    landmarks: list | None = None

    def model(self) -> SystemModel:
        params = dict(self.model_params)
        if self.landmarks is not None:
            params["landmarks"] = [tuple(p) for p in self.landmarks]
        return get_model(self.model_name, params)

    def with_overrides(self, **kw) -> "Scenario":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "methods" in kw:
            kw["methods"] = tuple(MethodId.parse(m) for m in kw["methods"])
        out = replace(self, **kw)
        out.validate()
        return out

    def validate(self):
        if self.steps < 1:
            raise ParseError("steps must be >= 1")
        if self.samples < 1:
            raise ParseError("samples must be >= 1")
        if self.model_name not in MODELS:
            raise ModelNotFound(f"unknown model {self.model_name!r}; known: {sorted(MODELS)}")
        try:
            parse_strategy(self.family)
        except ValueError as err:
            raise ParseError(str(err)) from err
        m = self.model()
        if self.X0.n != m.nx or self.W.n != m.nw or self.V.n != m.nmu:
            raise ParseError(
                f"set dimensions X0={self.X0.n}, W={self.W.n}, V={self.V.n} do not match "
                f"model nx={m.nx}, nw={m.nw}, nmu={m.nmu}")
        if self.x0 is not None and np.size(self.x0) != m.nx:
            raise ParseError("x0 has the wrong dimension")


def _set(d, key):
    if key not in d:
        raise ParseError(f"scenario is missing {key!r}")
    try:
        S = set_from_dict(d[key])
    except (KeyError, ValueError, TypeError) as err:
        raise ParseError(f"malformed set {key!r}: {err}") from err
    if not isinstance(S, ConstrainedZonotope):
        raise ParseError(f"{key!r} must be a zonotope, constrained zonotope or box")
    return S


def scenario_from_dict(d: dict) -> Scenario:
    if not isinstance(d, dict):
        raise ParseError("scenario must be a JSON object")
    try:
        methods = tuple(MethodId.parse(m) for m in d.get("methods", [m.value for m in ALL_METHODS]))
        sc = Scenario(
            model_name=str(d["model"]),
            X0=_set(d, "X0"), W=_set(d, "W"), V=_set(d, "V"),
            model_params=dict(d.get("model_params", {})),
            steps=int(d.get("steps", 5)),
            seed=int(d.get("seed", 0)),
            methods=methods,
            family=str(d.get("family", "canonical")),
            samples=int(d.get("samples", 10000)),
            polygon_directions=int(d.get("polygon_directions", 64)),
            x0=None if d.get("x0") is None else np.asarray(d["x0"], float),
            landmarks=d.get("landmarks"),
        )
    except (ParseError, ModelNotFound):
        raise
    except (KeyError, ValueError, TypeError) as err:
        raise ParseError(f"malformed scenario: {err}") from err
    sc.validate()
    return sc


def load_scenario(path) -> Scenario:
    """Read a scenario file; ``path`` may also name a built-in scenario."""
    p = Path(path)
    if not p.exists() and str(path) in BUILTIN_SCENARIOS:
        text = resources.files("zonoest.scenarios").joinpath(f"{path}.json").read_text()
    else:
        try:
            text = p.read_text()
        except OSError as err:
            raise ParseError(f"cannot read scenario {path}: {err}") from err
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON in {path}: {err}") from err
    return scenario_from_dict(data)


# -- sampling ------------------------------------------------------------

def sample_uniform(S: ConstrainedZonotope, n: int, rng: np.random.Generator, budget: int = 200) -> np.ndarray:
    """``n`` uniform samples from ``S`` by rejection from its interval hull."""
    hull = S.interval_hull()
    if n == 0:
        return np.zeros((0, S.n))
    if S.nc == 0 and S.G.shape[0] == S.G.shape[1] and np.count_nonzero(S.G - np.diag(np.diag(S.G))) == 0:
        return hull.lo + rng.random((n, S.n)) * hull.diam
    out, have = [], 0
    for _ in range(budget):
        Z = hull.lo + rng.random((max(4 * n, 1000), S.n)) * hull.diam
        Z = Z[S.contains_points(Z)]
        out.append(Z)
        have += len(Z)
        if have >= n:
            return np.vstack(out)[:n]
    raise RejectionBudgetExceeded(f"only {have} of {n} samples accepted")


def simulate_truth(model: SystemModel, sc: Scenario, seed: int | None = None):
    """True states ``x_0..x_{steps-1}`` and measurements ``y_1..y_{steps-1}``.

    ``x_0`` is ``sc.x0`` when given, otherwise drawn uniformly from ``X0``;
    disturbances and measurement noise are drawn uniformly from ``W`` and ``V``.
    """
    rng = np.random.default_rng(sc.seed if seed is None else seed)
    x = sc.x0.copy() if sc.x0 is not None else sample_uniform(sc.X0, 1, rng)[0]
    states, ys = [x], []
    for _ in range(1, sc.steps):
        w = sample_uniform(sc.W, 1, rng)[0]
        x = model.step(x, w)
        v = sample_uniform(sc.V, 1, rng)[0]
        states.append(x)
        ys.append(model.observe(x) + v)
    return np.array(states), np.array(ys).reshape(len(ys), model.nmu)


def consistent_samples(model: SystemModel, sc: Scenario, measurements, n: int, seed: int,
                       truth=None, batch: int = 50000, max_batches: int = 200) -> list[np.ndarray]:
    """States of admissible trajectories that agree with the measurements.

    Step 0 draws ``n`` points uniformly from ``X0``.  Step ``k`` pushes
    randomly chosen step-``k-1`` samples through the dynamics with uniform
    disturbances and keeps successors ``x`` with ``y_k - mu(x)`` in ``V``.
    Every kept point is the state of some trajectory with ``x_0 in X0``,
    ``w in W`` and ``v in V`` that reproduces ``y_1..y_k``.  The true states,
    when given, are always included.
    """
    rng = np.random.default_rng(seed)
    cur = sample_uniform(sc.X0, n, rng)
    if truth is not None:
        cur = np.vstack([truth[0][None, :], cur[: n - 1]])
    out = [cur]
    for k, y in enumerate(measurements, start=1):
        kept, have = [], 0
        for _ in range(max_batches):
            parents = cur[rng.integers(0, len(cur), batch)]
            w = sample_uniform(sc.W, batch, rng)
            x = model.step(parents.T, w.T).T
            ok = np.all(np.isfinite(x), axis=1)
            x = x[ok]
            v = y[None, :] - model.observe(x.T).T
            x = x[sc.V.contains_points(v)]
            kept.append(x)
            have += len(x)
            if have >= n:
                break
        nxt = np.vstack(kept)[:n] if kept else np.zeros((0, model.nx))
        if truth is not None:
            nxt = np.vstack([truth[k][None, :], nxt[: n - 1]])
        if len(nxt) == 0:
            raise RejectionBudgetExceeded(f"no consistent samples at step {k}")
        out.append(nxt)
        cur = nxt
    return out
