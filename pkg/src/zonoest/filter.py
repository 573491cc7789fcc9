"""Set-membership estimators: propagation, measurement update and the recursive loop.

Five methods are provided:

``RRSR``    mean-value propagation and update on a single constrained zonotope,
            with interval-extension Jacobian bounds.
``D-RRSR``  the same with Jacobian bounds refined by mixed-monotone decomposition.
``D-ZB``    decomposition-based propagation of a zonotope bundle.
``D-CZ``    decomposition-based propagation and update of a constrained zonotope.
``COMB``    the intersection of the other four.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import sets as S
from .exceptions import EmptySet, HNotInX, InfeasibleProgram, X0NotInPrior, ZonoestError
from .expr import eval_point
from .interval import IntervalMatrix, IntervalVector
from .mixmono import BOUND_PAD, bound_jacobian_via_decomposition, function_bounds, jss_remainder_bounds, pipeline_family
from .model import SystemModel
from .sets import ConstrainedZonotope, SetEnclosure, Zonotope, ZonotopeBundle


class MethodId(str, enum.Enum):
    RRSR = "RRSR"
    D_RRSR = "D-RRSR"
    D_ZB = "D-ZB"
    D_CZ = "D-CZ"
    COMB = "COMB"

    @classmethod
    def parse(cls, name) -> "MethodId":
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper().replace("_", "-")
        for m in cls:
            if m.value == key:
                return m
        raise ValueError(f"unknown method {name!r}; expected one of {[m.value for m in cls]}")


ALL_METHODS = tuple(MethodId)
BASE_METHODS = (MethodId.RRSR, MethodId.D_RRSR, MethodId.D_ZB, MethodId.D_CZ)

STATUS_OK = "ok"
STATUS_EMPTY = "empty_update"
STATUS_SKIPPED = "skipped"
STATUS_EMPTY_SET = "empty"


@dataclass
class StepRecord:
    k: int
    method: MethodId
    propagated: SetEnclosure | None
    updated: SetEnclosure | None
    wall_time: float
    volume: float = float("nan")
    volume_stderr: float = float("nan")
    status: str = STATUS_OK
    containment_fraction: float = float("nan")


# -- helpers ---------------------------------------------------------------

def _box_image(G, c, box: IntervalVector) -> IntervalVector:
    mid = c + G @ box.mid
    rad = np.abs(G) @ box.rad
    return IntervalVector(mid - rad, mid + rad)


def _composed(exprs, G, c) -> Callable[[np.ndarray], np.ndarray]:
    c = np.asarray(c, float)
    return lambda P: eval_point(exprs, c[:, None] + G @ P)


def _composed_jacobian(jac, G, c, box: IntervalVector) -> IntervalMatrix:
    """Bounds of the Jacobian of ``xi -> f(c + G xi)`` over ``box`` (chain rule)."""
    from .expr import jacobian_bounds_over_box
    return jacobian_bounds_over_box(jac, _box_image(G, c, box)).rmatmul_real(G)


def _remainder_parts(f, sel, box):
    lo, hi = jss_remainder_bounds(f, sel, box)
    pad = BOUND_PAD * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
    return 0.5 * (lo + hi), 0.5 * (hi - lo) + pad


def _diag_nonzero(r) -> np.ndarray:
    D = np.diag(r)
    return D[:, r > 0]


def _anchor(X: ConstrainedZonotope, hull: IntervalVector, point, err) -> np.ndarray:
    """Expansion point: ``point`` if given (must lie in ``X``), else the centre of ``X``.

    The centre of a constrained zonotope can fall outside its interval hull;
    the hull midpoint is used then, which keeps every mean-value segment
    inside the hull.
    """
    if point is not None:
        point = np.asarray(point, float)
        if not X.contains(point):
            raise err("expansion point is not a member of the set")
        return point
    if hull.contains(X.c):
        return X.c.copy()
    return hull.mid


def cz_bound_product(J: IntervalMatrix, X: ConstrainedZonotope) -> ConstrainedZonotope:
    """Constrained zonotope containing ``{J x | J in J, x in X}``."""
    if not isinstance(J, IntervalMatrix):
        J = IntervalMatrix(*J)
    if J.shape[1] != X.n:
        from .exceptions import DimensionMismatch
        raise DimensionMismatch(f"J has {J.shape[1]} columns, set has dimension {X.n}")
    Jm, Jr = J.mid, J.rad
    # |c_k| + sum_j |G_kj| is the magnitude bound of coordinate k over the zonotope hull
    mag = np.abs(X.c) + np.abs(X.G).sum(axis=1)
    p = Jr @ mag
    P = _diag_nonzero(p)
    G = np.hstack([Jm @ X.G, P])
    A = np.hstack([X.A, np.zeros((X.nc, P.shape[1]))])
    if X.nc == 0:
        return Zonotope(G, Jm @ X.c)
    return ConstrainedZonotope(G, Jm @ X.c, A, X.b)


def _jacobian(model_jac, model_hess, box, source, strategy, seed) -> IntervalMatrix:
    from .expr import jacobian_bounds_over_box
    if source == "decomposition":
        return bound_jacobian_via_decomposition(model_jac, model_hess, box, strategy, seed)
    if source != "interval":
        raise ValueError(f"unknown Jacobian source {source!r}")
    return jacobian_bounds_over_box(model_jac, box)


# -- propagation -----------------------------------------------------------

def rrsr_propagate(model: SystemModel, X: ConstrainedZonotope, W: ConstrainedZonotope, h=None,
                   jac_source: str = "interval", strategy="canonical", seed: int = 0) -> ConstrainedZonotope:
    """Mean-value enclosure ``Z + mid(J)(X - h) + P B`` of ``f(X, W)``.

    ``Z`` is a box containing ``f(h, W)``.  With ``jac_source='decomposition'``
    the Jacobian bounds are refined by mixed-monotone decomposition.
    """
    nx = model.nx
    hx = X.interval_hull()
    hw = W.interval_hull()
    h = _anchor(X, hx, h, HNotInX)
    box_z = IntervalVector(np.concatenate([hx.lo, hw.lo]), np.concatenate([hx.hi, hw.hi]))
    J = _jacobian(model.jac_f, model.hess_f, box_z, jac_source, strategy, seed)
    Jx = IntervalMatrix(J.lo[:, :nx], J.hi[:, :nx])
    Jw = (J.lo[:, nx:], J.hi[:, nx:])

    def f_at_h(P):
        H = np.broadcast_to(h[:, None], (nx, P.shape[1]))
        return eval_point(model.f, np.vstack([H, P]))

    zbox = function_bounds(f_at_h, Jw[0], Jw[1], hw, strategy, seed)
    Z = Zonotope.from_box(zbox.lo, zbox.hi)
    return S.minkowski_sum(Z, cz_bound_product(Jx, S.translate(X, -h)))


def dzb_propagate(model: SystemModel, members: Sequence[ConstrainedZonotope], strategy="canonical",
                  seed: int = 0) -> SetEnclosure:
    """Decomposition-based image of a zonotope bundle over ``z = [x; w]``.

    For every member and every ``H`` of the family the zonotope
    ``{[H, diag(r)], m}`` is emitted, where ``m +- r`` bounds the remainder
    ``f(c + G xi) - H xi`` on the unit box.
    """
    out = []
    for Zs in members:
        G, c = Zs.G, Zs.c
        box = IntervalVector.unit(Zs.ng)
        Jt = _composed_jacobian(model.jac_f, G, c, box)
        ft = _composed(model.f, G, c)
        for sel in pipeline_family(Jt.lo, Jt.hi, strategy, seed):
            m, r = _remainder_parts(ft, sel, box)
            out.append(Zonotope(np.hstack([sel.H, _diag_nonzero(r)]), m))
    return SetEnclosure(out)


def _latent_box(Z: ConstrainedZonotope) -> IntervalVector:
    if Z.nc == 0:
        return IntervalVector.unit(Z.ng)
    return S.constraint_interval_bound(Z.A, Z.b, Z.ng)


def dcz_propagate(model: SystemModel, Z: ConstrainedZonotope, strategy="canonical", seed: int = 0) -> SetEnclosure:
    """Decomposition-based image of a constrained zonotope over ``z = [x; w]``.

    Remainder bounds are taken over the latent box implied by the constraints.
    The per-``H`` sets share the latent block and are folded into one member.
    """
    if Z.nc and Z.is_empty():
        raise EmptySet("input constrained zonotope is empty")
    box = _latent_box(Z)
    Jt = _composed_jacobian(model.jac_f, Z.G, Z.c, box)
    ft = _composed(model.f, Z.G, Z.c)
    members = []
    for sel in pipeline_family(Jt.lo, Jt.hi, strategy, seed):
        m, r = _remainder_parts(ft, sel, box)
        D = _diag_nonzero(r)
        G = np.hstack([sel.H, D])
        A = np.hstack([Z.A, np.zeros((Z.nc, D.shape[1]))])
        members.append(ConstrainedZonotope(G, m, A, Z.b))
    # The folded set keeps the first member's generators, so start with the
    # member whose zonotope hull is smallest.
    members.sort(key=lambda M: float(np.abs(M.G).sum()))
    acc = members[0]
    for member in members[1:]:
        acc = S.intersect_cz(acc, member, Z.ng)
    return SetEnclosure([acc])


def combined_propagate(model: SystemModel, bundle_members: Sequence[ConstrainedZonotope], Z: ConstrainedZonotope,
                       strategy="canonical", seed: int = 0) -> SetEnclosure:
    """Intersection of the bundle-based and constrained-zonotope-based images."""
    return dzb_propagate(model, bundle_members, strategy, seed) & dcz_propagate(model, Z, strategy, seed)


# -- update ----------------------------------------------------------------

def _obs_shift(model: SystemModel, Y: ConstrainedZonotope) -> ConstrainedZonotope:
    if Y.n != model.nmu:
        from .exceptions import DimensionMismatch
        raise DimensionMismatch(f"measurement set has dimension {Y.n}, model outputs {model.nmu}")
    return Y


def dzb_update(model: SystemModel, prior: Sequence[ConstrainedZonotope], Y, strategy="canonical",
               seed: int = 0) -> SetEnclosure:
    """Decomposition-based update of zonotope members with measurement zonotopes ``Y``.

    For prior member ``r``, measurement member ``t`` and each ``Q`` of the
    family built from ``alpha -> mu(c_r + G_r alpha)``, emits the constrained
    zonotope whose constraint reads ``Q alpha - G_t gamma + diag(s) rho = c_t - m``.
    """
    Ys = [S.as_zonotope(t) if t.nc == 0 else t for t in S.as_enclosure(Y).members]
    out = []
    for r in prior:
        box = IntervalVector.unit(r.ng)
        Jt = _composed_jacobian(model.jac_mu, r.G, r.c, box)
        mut = _composed(model.mu, r.G, r.c)
        parts = [(sel, *_remainder_parts(mut, sel, box)) for sel in pipeline_family(Jt.lo, Jt.hi, strategy, seed)]
        for t in _shift_all(model, Ys):
            for sel, m, s in parts:
                D = _diag_nonzero(s)
                ng_t, nd = t.ng, D.shape[1]
                G = np.hstack([r.G, np.zeros((r.n, ng_t + nd))])
                rows = [np.hstack([sel.H, -t.G, D])]
                rhs = [t.c - m]
                if r.nc:
                    rows.insert(0, np.hstack([r.A, np.zeros((r.nc, ng_t + nd))]))
                    rhs.insert(0, r.b)
                if t.nc:
                    rows.insert(-1, np.hstack([np.zeros((t.nc, r.ng)), t.A, np.zeros((t.nc, nd))]))
                    rhs.insert(-1, t.b)
                out.append(ConstrainedZonotope(G, r.c, np.vstack(rows), np.concatenate(rhs)))
    return SetEnclosure(out)


def _shift_all(model, Ys):
    return [_obs_shift(model, t) for t in Ys]


def dcz_update(model: SystemModel, prior: ConstrainedZonotope, Y: ConstrainedZonotope, strategy="canonical",
               seed: int = 0) -> SetEnclosure:
    """Decomposition-based update of a constrained zonotope.

    Remainder bounds of ``beta -> mu(c + G beta) - Omega beta`` are taken over
    the latent box implied by the prior's constraints.  The per-``Omega``
    sets share the prior latent ``beta`` and the measurement latent ``gamma``
    and are folded into one member.
    """
    Y = _obs_shift(model, Y)
    if prior.nc and prior.is_empty():
        raise EmptySet("prior constrained zonotope is empty")
    box = _latent_box(prior)
    Jt = _composed_jacobian(model.jac_mu, prior.G, prior.c, box)
    lam = _composed(model.mu, prior.G, prior.c)
    nb, ny = prior.ng, Y.ng
    acc = None
    for sel in pipeline_family(Jt.lo, Jt.hi, strategy, seed):
        m, s = _remainder_parts(lam, sel, box)
        D = _diag_nonzero(s)
        nd = D.shape[1]
        G = np.hstack([prior.G, np.zeros((prior.n, ny + nd))])
        A = np.vstack([
            np.hstack([prior.A, np.zeros((prior.nc, ny + nd))]),
            np.hstack([np.zeros((Y.nc, nb)), Y.A, np.zeros((Y.nc, nd))]),
            np.hstack([sel.H, -Y.G, D]),
        ])
        b = np.concatenate([prior.b, Y.b, Y.c - m])
        member = ConstrainedZonotope(G, prior.c, A, b)
        acc = member if acc is None else S.intersect_cz(acc, member, nb + ny)
    return SetEnclosure([acc])


def rrsr_update(model: SystemModel, prior: ConstrainedZonotope, Y: ConstrainedZonotope, x0=None,
                jac_source: str = "interval", strategy="canonical", seed: int = 0) -> ConstrainedZonotope:
    """Mean-value update ``{x in prior | mu(x) in Y}`` around ``x0``.

    Uses ``mu(x) in mu(x0) + mid(J)(x - x0) + P rho`` with ``P`` from the
    zero-centred part of the Jacobian bounds over the prior's hull.
    """
    Y = _obs_shift(model, Y)
    hx = prior.interval_hull()
    x0 = _anchor(prior, hx, x0, X0NotInPrior)
    J = _jacobian(model.jac_mu, model.hess_mu, hx, jac_source, strategy, seed)
    Jm = J.mid
    shifted = S.translate(prior, -x0)
    mag = np.abs(shifted.c) + np.abs(shifted.G).sum(axis=1)
    P = _diag_nonzero(J.rad @ mag)
    nb, ny, npp = prior.ng, Y.ng, P.shape[1]
    G = np.hstack([prior.G, np.zeros((prior.n, ny + npp))])
    A = np.vstack([
        np.hstack([prior.A, np.zeros((prior.nc, ny + npp))]),
        np.hstack([np.zeros((Y.nc, nb)), Y.A, np.zeros((Y.nc, npp))]),
        np.hstack([Jm @ prior.G, -Y.G, P]),
    ])
    mu0 = eval_point(model.mu, x0)
    b = np.concatenate([prior.b, Y.b, Y.c - mu0 + Jm @ (x0 - prior.c)])
    return ConstrainedZonotope(G, prior.c, A, b)


# -- recursive loop --------------------------------------------------------

def measurement_set(y, V: ConstrainedZonotope) -> ConstrainedZonotope:
    """``{y} + (-V)``: outputs consistent with measurement ``y`` under noise ``V``."""
    negV = S.linear_map(-np.eye(V.n), V)
    return S.translate(negV, np.asarray(y, float))


@dataclass
class EstimatorConfig:
    strategy: object = "canonical"
    seed: int = 0
    rescale: bool = True
    anchor: bool = True
    exact_bundle: bool = True


def _rescaled(Z: ConstrainedZonotope, cfg: EstimatorConfig) -> ConstrainedZonotope:
    if not (cfg.rescale and Z.nc):
        return Z
    try:
        return S.rescale(Z)
    except EmptySet:
        # left as is; the step flags it as an empty update
        return Z


def _anchored(Z: ConstrainedZonotope, cfg: EstimatorConfig) -> ConstrainedZonotope:
    return S.anchor_to_hull(Z) if cfg.anchor else Z


def _single(enc: SetEnclosure) -> ConstrainedZonotope:
    return enc.members[0] if len(enc) == 1 else enc.fold()


def _step_rrsr(model, X: SetEnclosure, W, Y, cfg, source):
    Xc = _anchored(_single(X), cfg)
    prop = rrsr_propagate(model, Xc, W, jac_source=source, strategy=cfg.strategy, seed=cfg.seed)
    upd = rrsr_update(model, _anchored(prop, cfg), Y, jac_source=source, strategy=cfg.strategy, seed=cfg.seed)
    return SetEnclosure([prop]), SetEnclosure([_rescaled(upd, cfg)])


def _step_dzb(model, X: SetEnclosure, W, Y, cfg):
    if all(m.nc == 0 for m in X.members):
        bundle = ZonotopeBundle(X.members)
    else:
        bundle = S.enclosure_to_bundle(X, exact=cfg.exact_bundle)
    members = [S.cartesian_product(m, W) for m in bundle.members]
    prop = dzb_propagate(model, members, cfg.strategy, cfg.seed)
    upd = dzb_update(model, prop.members, Y, cfg.strategy, cfg.seed)
    return prop, upd


def _step_dcz(model, X: SetEnclosure, W, Y, cfg):
    Z = S.cartesian_product(_anchored(_single(X), cfg), W)
    prop = dcz_propagate(model, Z, cfg.strategy, cfg.seed)
    upd = dcz_update(model, _anchored(prop.members[0], cfg), Y, cfg.strategy, cfg.seed)
    return prop, SetEnclosure([_rescaled(upd.members[0], cfg)])


def _run_base(method: MethodId, model, X, W, Y, cfg):
    if method is MethodId.RRSR:
        return _step_rrsr(model, X, W, Y, cfg, "interval")
    if method is MethodId.D_RRSR:
        return _step_rrsr(model, X, W, Y, cfg, "decomposition")
    if method is MethodId.D_ZB:
        return _step_dzb(model, X, W, Y, cfg)
    if method is MethodId.D_CZ:
        return _step_dcz(model, X, W, Y, cfg)
    raise ValueError(f"{method} is not a base method")


def _nonempty(enc: SetEnclosure) -> bool:
    """False when some member is empty.

    An empty intersection of non-empty members is not detected here; it
    surfaces as ``EmptySet`` in the next step's support computations.
    """
    return not any(m.is_empty() for m in enc.members)


def _reduce_for_comb(X: SetEnclosure) -> ConstrainedZonotope:
    """Single constrained zonotope containing an enclosure (template polytope)."""
    if len(X) == 1:
        return X.members[0]
    return S.rescale(S.polytope_to_cz(S.template_polytope(X, exact=False)))


def estimator_step(method, X_prev: SetEnclosure, W: ConstrainedZonotope, Y: ConstrainedZonotope,
                   model: SystemModel, k: int = 0, cfg: EstimatorConfig | None = None,
                   chain_updates: dict | None = None) -> StepRecord:
    """One propagation + update of ``method`` from ``X_prev``.

    For ``COMB``, every base method is run from (a reduction of) the previous
    combined set and the results are intersected with ``chain_updates``, the
    base methods' own updated sets at this step, when supplied.  An empty
    update is recorded with status ``empty_update`` and the propagated set
    is kept as the updated set.
    """
    cfg = cfg or EstimatorConfig()
    method = MethodId.parse(method)
    t0 = time.perf_counter()
    if method is MethodId.COMB:
        reduced = SetEnclosure([_reduce_for_comb(X_prev)])
        props, upds = [], []
        for base in BASE_METHODS:
            p, u = _run_base(base, model, reduced, W, Y, cfg)
            props.append(p)
            upds.append(u)
        prop = SetEnclosure([m for p in props for m in p.members])
        members = [m for u in upds for m in u.members]
        for u in (chain_updates or {}).values():
            if u is not None:
                members.extend(u.members)
        upd = SetEnclosure(members)
    else:
        prop, upd = _run_base(method, model, X_prev, W, Y, cfg)
    wall = time.perf_counter() - t0
    status = STATUS_OK
    if not _nonempty(upd):
        status, upd = STATUS_EMPTY, prop
    return StepRecord(k, method, prop, upd, wall, status=status)


def _failure_status(err: Exception) -> str:
    if isinstance(err, EmptySet):
        return STATUS_EMPTY_SET
    return f"failed:{type(err).__name__}"


def run_estimators(model: SystemModel, X0: ConstrainedZonotope, W: ConstrainedZonotope, V: ConstrainedZonotope,
                   measurements: Sequence, methods=ALL_METHODS, cfg: EstimatorConfig | None = None,
                   on_record: Callable[[StepRecord], None] | None = None) -> list[StepRecord]:
    """Run the selected methods over ``measurements[k-1]`` for ``k = 1..len(measurements)``.

    Step ``k = 0`` records the initial set itself for every method.  A method
    that raises is marked ``failed:<error>`` and skipped afterwards.
    """
    cfg = cfg or EstimatorConfig()
    methods = [MethodId.parse(m) for m in methods]
    init = SetEnclosure([X0])
    state: dict[MethodId, SetEnclosure | None] = {m: init for m in methods}
    records = []

    def emit(rec):
        records.append(rec)
        if on_record is not None:
            on_record(rec)

    for m in methods:
        emit(StepRecord(0, m, init, init, 0.0))
    for k, y in enumerate(measurements, start=1):
        Y = measurement_set(y, V)
        chain = {}
        for m in methods:
            if m is MethodId.COMB:
                continue
            chain[m] = None
            if state[m] is None:
                emit(StepRecord(k, m, None, None, 0.0, status=STATUS_SKIPPED))
                continue
            try:
                rec = estimator_step(m, state[m], W, Y, model, k, cfg)
            except ZonoestError as err:
                rec = StepRecord(k, m, None, None, 0.0, status=_failure_status(err))
                state[m] = None
            else:
                state[m] = chain[m] = rec.updated
            emit(rec)
        if MethodId.COMB in methods:
            m = MethodId.COMB
            if state[m] is None:
                emit(StepRecord(k, m, None, None, 0.0, status=STATUS_SKIPPED))
                continue
            try:
                rec = estimator_step(m, state[m], W, Y, model, k, cfg, chain_updates=chain)
                rec.wall_time += sum(r.wall_time for r in records if r.k == k and r.method is not m)
            except ZonoestError as err:
                rec = StepRecord(k, m, None, None, 0.0, status=_failure_status(err))
                state[m] = None
            else:
                state[m] = rec.updated
            emit(rec)
    return records
