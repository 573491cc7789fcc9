"""System models ``x+ = f(x, w)``, ``mu(x) in Y`` built from expression trees."""
from __future__ import annotations

from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .exceptions import DimensionMismatch, ModelNotFound
from .expr import Expr, compose_affine, eval_point, jacobian_bounds_over_box, jacobian_exprs
from .interval import IntervalMatrix, IntervalVector


class SystemModel:
    """Dynamics over ``z = [x; w]`` and an observation map over ``x``.

    Parameters
    ----------
    nx, nw : int
        State and disturbance dimensions.
    f : sequence of Expr, length ``nx``
        Successor state as expressions in ``z = [x; w]``.
    mu : sequence of Expr
        Observation (or constraint) map as expressions in ``x``.
    name : str
        Label used in outputs.
    """

    def __init__(self, nx: int, nw: int, f: Sequence[Expr], mu: Sequence[Expr], name: str = "model"):
        f = [ex.as_expr(e) for e in f]
        mu = [ex.as_expr(e) for e in mu]
        if len(f) != nx:
            raise DimensionMismatch(f"f has {len(f)} components, expected nx={nx}")
        for e in f:
            if e.max_index() >= nx + nw:
                raise DimensionMismatch(f"{e} references a variable beyond z = [x; w]")
        for e in mu:
            if e.max_index() >= nx:
                raise DimensionMismatch(f"{e} references a variable beyond x")
        self.nx, self.nw, self.nmu = nx, nw, len(mu)
        self.f, self.mu, self.name = list(f), list(mu), name

    @property
    def nz(self) -> int:
        return self.nx + self.nw

    @cached_property
    def jac_f(self) -> list[list[Expr]]:
        return jacobian_exprs(self.f, self.nz)

    @cached_property
    def jac_mu(self) -> list[list[Expr]]:
        return jacobian_exprs(self.mu, self.nx)

    @cached_property
    def hess_f(self) -> list[list[list[Expr]]]:
        """``hess_f[i][j][k] = d^2 f_i / dz_j dz_k``."""
        return [jacobian_exprs(row, self.nz) for row in self.jac_f]

    @cached_property
    def hess_mu(self) -> list[list[list[Expr]]]:
        return [jacobian_exprs(row, self.nx) for row in self.jac_mu]

    # -- evaluation ---------------------------------------------------------

    def step(self, x, w) -> np.ndarray:
        """Successor state(s); ``x``/``w`` may carry points column-wise."""
        return eval_point(self.f, np.concatenate([np.asarray(x, float), np.asarray(w, float)]))

    def observe(self, x) -> np.ndarray:
        return eval_point(self.mu, x)

    def jac_f_bounds(self, box_z) -> IntervalMatrix:
        return jacobian_bounds_over_box(self.jac_f, box_z)

    def jac_mu_bounds(self, box_x) -> IntervalMatrix:
        return jacobian_bounds_over_box(self.jac_mu, box_x)

    @cached_property
    def linear_observation(self):
        """``(C, d)`` when ``mu(x) = C x + d`` exactly, else ``None``."""
        if not all(isinstance(e, ex.Const) for row in self.jac_mu for e in row):
            return None
        C = np.array([[e.value for e in row] for row in self.jac_mu], dtype=float).reshape(self.nmu, self.nx)
        d = eval_point(self.mu, np.zeros(self.nx))
        return C, d

    def composed_dynamics(self, G, c) -> list[Expr]:
        return compose_affine(self.f, G, c)

    def __repr__(self):
        return f"SystemModel(name={self.name!r}, nx={self.nx}, nw={self.nw}, nmu={self.nmu})"


# -- built-in models ---------------------------------------------------------

def example1(params: dict | None = None) -> SystemModel:
    """Two-state rational system with additive noise and linear outputs."""
    x1, x2, w1, w2 = ex.variables(4)
    f = [
        3 * x1 - x1 * x1 / 7 - 4 * x1 * x2 / (4 + x1) + w1,
        -2 * x2 + 3 * x1 * x2 / (4 + x1) + w2,
    ]
    mu = [x1, x2 - x1]
    return SystemModel(2, 2, f, mu, name="example1")


DEFAULT_LANDMARKS = ((-2.0, 0.0), (2.0, 2.0))


def unicycle(params: dict | None = None) -> SystemModel:
    """Discretised unicycle with range/bearing measurements to two landmarks.

    Parameters (all optional): ``T0`` (sampling period, 1.0), ``phi_w`` (0.3),
    ``phi_theta`` (0.15) and ``landmarks`` (``[(-2, 0), (2, 2)]``).
    """
    params = dict(params or {})
    T0 = float(params.get("T0", 1.0))
    phi_w = float(params.get("phi_w", 0.3))
    phi_theta = float(params.get("phi_theta", 0.15))
    landmarks = params.get("landmarks") or DEFAULT_LANDMARKS
    sx, sy, th, w1, w2, w3 = ex.variables(6)
    f = [
        sx + T0 * phi_w * ex.cos(th) + w1,
        sy + T0 * phi_w * ex.sin(th) + w2,
        th + T0 * phi_theta + w3,
    ]
    mu = []
    for lx, ly in landmarks:
        dx, dy = float(lx) - sx, float(ly) - sy
        mu.append(ex.sqrt(dx * dx + dy * dy))
        mu.append(th - ex.arctan(dy / dx))
    return SystemModel(3, 3, f, mu, name="unicycle")


def linear(params: dict) -> SystemModel:
    """``x+ = A x + w`` with ``mu(x) = C x``; ``params`` holds ``A`` and ``C``."""
    A = np.atleast_2d(np.asarray(params["A"], float))
    C = np.atleast_2d(np.asarray(params["C"], float))
    n = A.shape[0]
    xs = ex.variables(2 * n)

    def row(M, i, offset=0):
        e: Expr = ex.ZERO
        for j in range(M.shape[1]):
            if M[i, j] != 0.0:
                e = ex.add(e, ex.mul(ex.Const(M[i, j]), xs[j]))
        return e

    f = [ex.add(row(A, i), xs[n + i]) for i in range(n)]
    mu = [row(C, i) for i in range(C.shape[0])]
    return SystemModel(n, n, f, mu, name="linear")


MODELS: dict[str, Callable[[dict], SystemModel]] = {
    "example1": example1,
    "unicycle": unicycle,
    "linear": linear,
}


def get_model(name: str, params: dict | None = None) -> SystemModel:
    try:
        factory = MODELS[name]
    except KeyError:
        raise ModelNotFound(f"no built-in model named {name!r}; known: {sorted(MODELS)}") from None
    return factory(params or {})
