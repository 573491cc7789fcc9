"""Zonotopes, constrained zonotopes, bundles, H-polytopes and intersection lists.

All set objects are immutable.  Membership, supports and hulls are computed
with the simplex solver in :mod:`zonoest.lp`.
"""
from __future__ import annotations

import math
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import lp
from .exceptions import (
    DimensionMismatch,
    EmptySet,
    InfeasibleProgram,
    UnboundedPolytope,
    UnboundedProgram,
)
from .interval import IntervalVector

RESCALE_MARGIN = 1e-9


def _mat(a, rows=None, cols=None) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1 and rows is not None and cols is not None:
        a = a.reshape(rows, cols)
    elif a.ndim < 2:
        a = np.atleast_2d(a)
    return a


class ConstrainedZonotope:
    """``{G xi + c | A xi = b, ||xi||_inf <= 1}``."""

    __slots__ = ("G", "c", "A", "b", "_hull_cache", "_screen")

    def __init__(self, G, c, A=None, b=None):
        c = np.atleast_1d(np.asarray(c, dtype=float)).ravel()
        G = np.asarray(G, dtype=float)
        if G.size == 0:
            G = G.reshape(c.size, -1) if G.ndim == 2 and G.shape[0] == c.size else np.zeros((c.size, 0))
        G = G.reshape(c.size, -1) if G.ndim != 2 else G
        ng = G.shape[1]
        if A is None or np.size(A) == 0:
            A = np.zeros((0, ng))
            b = np.zeros(0)
        else:
            A = np.asarray(A, dtype=float)
            A = A.reshape(-1, ng) if A.ndim != 2 else A
            b = np.atleast_1d(np.asarray(b, dtype=float)).ravel()
        if G.shape[0] != c.size:
            raise DimensionMismatch(f"G has {G.shape[0]} rows but c has {c.size} entries")
        if A.shape[1] != ng or A.shape[0] != b.size:
            raise DimensionMismatch(f"A {A.shape} / b {b.shape} do not match {ng} generators")
        self.G, self.c, self.A, self.b = G, c, A, b
        self._hull_cache = None
        self._screen = None
        for arr in (G, c, A, b):
            arr.setflags(write=False)

    # -- shape ------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def ng(self) -> int:
        return self.G.shape[1]

    @property
    def nc(self) -> int:
        return self.A.shape[0]

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, ng={self.ng}, nc={self.nc})"

    # -- queries ------------------------------------------------------------

    def contains_points(self, Z, tol: float = lp.FEAS_TOL) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, float))
        if Z.shape[1] != self.n:
            raise DimensionMismatch(f"points of dimension {Z.shape[1]} vs set dimension {self.n}")
        if self.nc == 0 or Z.shape[0] < SCREEN_MIN_POINTS or self.n > 3:
            return lp.cz_contains_points(self.G, self.c, self.A, self.b, Z, tol)
        if self._screen is None:
            object.__setattr__(self, "_screen", _MembershipScreen(self))
        inside, undecided = self._screen.classify(Z, tol)
        if undecided.any():
            inside[undecided] = lp.cz_contains_points(self.G, self.c, self.A, self.b, Z[undecided], tol)
        return inside

    def contains(self, z, tol: float = lp.FEAS_TOL) -> bool:
        return bool(self.contains_points(np.asarray(z, float)[None, :], tol)[0])

    def support(self, d) -> float:
        d = np.asarray(d, float)
        if d.size != self.n:
            raise DimensionMismatch("direction dimension mismatch")
        return lp.cz_support(self.G, self.c, self.A, self.b, d)[0]

    def is_empty(self) -> bool:
        return lp.cz_feasible_latent(self.A, self.b, self.ng) is None

    def interval_hull(self) -> IntervalVector:
        if self._hull_cache is None:
            if self.nc == 0:
                r = np.abs(self.G).sum(axis=1)
                hull = IntervalVector(self.c - r, self.c + r)
            else:
                eye = np.eye(self.n)
                try:
                    hi = np.array([self.support(e) for e in eye])
                    lo = np.array([-self.support(-e) for e in eye])
                except InfeasibleProgram as err:
                    raise EmptySet("constrained zonotope is empty") from err
                hull = IntervalVector(np.minimum(lo, hi), np.maximum(lo, hi))
            object.__setattr__(self, "_hull_cache", hull)
        return self._hull_cache

    def center_point(self) -> np.ndarray:
        """A point of the set (the centre for zonotopes)."""
        xi = lp.cz_feasible_latent(self.A, self.b, self.ng)
        if xi is None:
            raise EmptySet("constrained zonotope is empty")
        return self.G @ xi + self.c

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, ConstrainedZonotope):
            return minkowski_sum(self, other)
        return translate(self, other)

    def __rmatmul__(self, R):
        return linear_map(R, self)

    def to_dict(self) -> dict:
        return {
            "type": "czonotope",
            "G": self.G.tolist(),
            "c": self.c.tolist(),
            "A": self.A.tolist(),
            "b": self.b.tolist(),
        }


SCREEN_MIN_POINTS = 500


def screen_directions(n: int) -> np.ndarray:
    """Unit directions used to bracket a low-dimensional set between two polytopes."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2 * np.pi * np.arange(64) / 64
        return np.column_stack([np.cos(th), np.sin(th)])
    # roughly uniform points on the sphere (Fibonacci lattice) plus the axes
    k = 40 * n * n
    i = np.arange(k) + 0.5
    phi = np.arccos(1 - 2 * i / k)
    th = np.pi * (1 + 5 ** 0.5) * i
    D = np.column_stack([np.cos(th) * np.sin(phi), np.sin(th) * np.sin(phi), np.cos(phi)])
    return np.vstack([D, np.eye(3), -np.eye(3)])


class _MembershipScreen:
    """Outer and inner polytopes around a constrained zonotope.

    Support values in a fixed direction set give an outer polytope; the
    maximisers are members, so their convex hull lies inside the set.  Points
    outside the first are rejected and points inside the second accepted
    without solving an LP.
    """

    def __init__(self, Z: "ConstrainedZonotope"):
        D = screen_directions(Z.n)
        h = np.empty(len(D))
        pts = np.empty((len(D), Z.n))
        for k, d in enumerate(D):
            h[k], xi = lp.cz_support(Z.G, Z.c, Z.A, Z.b, d)
            pts[k] = Z.G @ xi + Z.c
        self.D, self.h = D, h
        self.inner = None
        try:
            from scipy.spatial import Delaunay
            self.inner = Delaunay(np.unique(np.round(pts, 12), axis=0))
        except Exception:
            # flat or degenerate sets: every undecided point goes to the LP
            self.inner = None

    def classify(self, Z, tol):
        outside = np.any(Z @ self.D.T > self.h + tol, axis=1)
        inside = np.zeros(len(Z), dtype=bool)
        if self.inner is not None:
            cand = np.flatnonzero(~outside)
            inside[cand] = self.inner.find_simplex(Z[cand]) >= 0
        return inside, ~(outside | inside)


class Zonotope(ConstrainedZonotope):
    """``{G xi + c | ||xi||_inf <= 1}``."""

    __slots__ = ()

    def __init__(self, G, c):
        super().__init__(G, c)

    @classmethod
    def from_box(cls, lo, hi) -> "Zonotope":
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        return cls(np.diag(0.5 * (hi - lo)), 0.5 * (hi + lo))

    def contains_points(self, Z, tol: float = lp.FEAS_TOL):
        return super().contains_points(Z, tol)

    def to_dict(self) -> dict:
        return {"type": "zonotope", "G": self.G.tolist(), "c": self.c.tolist()}


def as_zonotope(Z: ConstrainedZonotope) -> Zonotope:
    if Z.nc:
        raise ValueError("set has constraints; use zonotope_hull")
    return Z if isinstance(Z, Zonotope) else Zonotope(Z.G, Z.c)


class ZonotopeBundle:
    """Intersection of zonotopes of a common dimension."""

    def __init__(self, members: Sequence[ConstrainedZonotope]):
        members = [as_zonotope(m) for m in members]
        if not members:
            raise ValueError("a bundle needs at least one zonotope")
        if len({m.n for m in members}) != 1:
            raise DimensionMismatch("bundle members differ in dimension")
        self.members = tuple(members)

    @property
    def n(self) -> int:
        return self.members[0].n

    def contains_points(self, Z, tol: float = lp.FEAS_TOL) -> np.ndarray:
        return SetEnclosure(self.members).contains_points(Z, tol)

    def contains(self, z, tol: float = lp.FEAS_TOL) -> bool:
        return bool(self.contains_points(np.asarray(z, float)[None, :], tol)[0])

    def to_enclosure(self) -> "SetEnclosure":
        return SetEnclosure(self.members)

    def to_dict(self) -> dict:
        return {"type": "bundle", "members": [m.to_dict() for m in self.members]}

    def __repr__(self):
        return f"ZonotopeBundle(n={self.n}, S={len(self.members)})"


class HPolytope:
    """``{z | Ap z <= bp}``."""

    def __init__(self, Ap, bp):
        Ap = np.atleast_2d(np.asarray(Ap, float))
        bp = np.atleast_1d(np.asarray(bp, float))
        if Ap.shape[0] != bp.size:
            raise DimensionMismatch("Ap and bp disagree")
        self.Ap, self.bp = Ap, bp

    @property
    def n(self) -> int:
        return self.Ap.shape[1]

    def contains_points(self, Z, tol: float = lp.FEAS_TOL) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, float))
        return np.all(Z @ self.Ap.T <= self.bp + tol, axis=1)

    def contains(self, z, tol: float = lp.FEAS_TOL) -> bool:
        return bool(self.contains_points(np.asarray(z, float)[None, :], tol)[0])


class SetEnclosure:
    """Intersection of constrained zonotopes; the common output of all estimators."""

    def __init__(self, members: Iterable[ConstrainedZonotope]):
        members = tuple(members)
        if not members:
            raise ValueError("an enclosure needs at least one member")
        if len({m.n for m in members}) != 1:
            raise DimensionMismatch("enclosure members differ in dimension")
        self.members = members
        self._folded = None

    @property
    def n(self) -> int:
        return self.members[0].n

    def __len__(self):
        return len(self.members)

    def __and__(self, other: "SetEnclosure") -> "SetEnclosure":
        return SetEnclosure(self.members + other.members)

    def contains_points(self, Z, tol: float = lp.FEAS_TOL, cache: dict | None = None) -> np.ndarray:
        """Membership of each row of ``Z``.

        ``cache`` (optional) maps ``id(member)`` to previously computed
        membership of the same ``Z``; it lets several enclosures that share
        member objects be tested without repeating LPs.
        """
        Z = np.atleast_2d(np.asarray(Z, float))
        inside = np.ones(Z.shape[0], dtype=bool)
        for m in self.members:
            idx = np.flatnonzero(inside)
            if idx.size == 0:
                break
            if cache is not None and id(m) in cache:
                inside &= cache[id(m)]
                continue
            res = np.zeros(Z.shape[0], dtype=bool)
            res[idx] = m.contains_points(Z[idx], tol)
            if cache is not None and idx.size == Z.shape[0]:
                cache[id(m)] = res
            inside &= res
        return inside

    def contains(self, z, tol: float = lp.FEAS_TOL) -> bool:
        return bool(self.contains_points(np.asarray(z, float)[None, :], tol)[0])

    def support_bound(self, d) -> float:
        """Upper bound on the support function: minimum of the members' supports."""
        try:
            return min(m.support(d) for m in self.members)
        except InfeasibleProgram as err:
            raise EmptySet("an enclosure member is empty") from err

    def fold(self) -> ConstrainedZonotope:
        """Single constrained zonotope equal to the intersection."""
        if self._folded is None:
            acc = self.members[0]
            for m in self.members[1:]:
                acc = intersect_cz(acc, m, 0)
            self._folded = acc
        return self._folded

    def support(self, d) -> float:
        """Exact support function of the intersection (one LP on the folded set)."""
        if len(self.members) == 1:
            return self.support_bound(d)
        try:
            return self.fold().support(d)
        except InfeasibleProgram as err:
            raise EmptySet("enclosure is empty") from err

    def total_generators(self) -> int:
        return sum(m.ng for m in self.members)

    def to_dict(self) -> dict:
        return {"type": "enclosure", "members": [m.to_dict() for m in self.members]}

    def __repr__(self):
        return f"SetEnclosure(n={self.n}, members={len(self.members)}, generators={self.total_generators()})"


def as_enclosure(S) -> SetEnclosure:
    if isinstance(S, SetEnclosure):
        return S
    if isinstance(S, ZonotopeBundle):
        return S.to_enclosure()
    if isinstance(S, ConstrainedZonotope):
        return SetEnclosure([S])
    raise TypeError(f"cannot interpret {type(S).__name__} as an enclosure")


# -- exact operations ---------------------------------------------------------

def _same_kind(G, c, A, b, like_zonotope: bool):
    if like_zonotope and A.shape[0] == 0:
        return Zonotope(G, c)
    return ConstrainedZonotope(G, c, A, b)


def linear_map(R, Z: ConstrainedZonotope) -> ConstrainedZonotope:
    R = np.atleast_2d(np.asarray(R, float))
    if R.shape[1] != Z.n:
        raise DimensionMismatch(f"R has {R.shape[1]} columns, set has dimension {Z.n}")
    return _same_kind(R @ Z.G, R @ Z.c, Z.A, Z.b, isinstance(Z, Zonotope))


def translate(Z: ConstrainedZonotope, v) -> ConstrainedZonotope:
    v = np.asarray(v, float)
    if v.size != Z.n:
        raise DimensionMismatch("translation vector dimension mismatch")
    return _same_kind(Z.G, Z.c + v, Z.A, Z.b, isinstance(Z, Zonotope))


def _blkdiag(A1, A2):
    out = np.zeros((A1.shape[0] + A2.shape[0], A1.shape[1] + A2.shape[1]))
    out[: A1.shape[0], : A1.shape[1]] = A1
    out[A1.shape[0]:, A1.shape[1]:] = A2
    return out


def minkowski_sum(Z1: ConstrainedZonotope, Z2: ConstrainedZonotope) -> ConstrainedZonotope:
    if Z1.n != Z2.n:
        raise DimensionMismatch(f"dimensions {Z1.n} and {Z2.n}")
    G = np.hstack([Z1.G, Z2.G])
    A = _blkdiag(Z1.A, Z2.A)
    zono = isinstance(Z1, Zonotope) and isinstance(Z2, Zonotope)
    return _same_kind(G, Z1.c + Z2.c, A, np.concatenate([Z1.b, Z2.b]), zono)


def cartesian_product(Zx: ConstrainedZonotope, Zw: ConstrainedZonotope) -> ConstrainedZonotope:
    G = _blkdiag(Zx.G, Zw.G)
    A = _blkdiag(Zx.A, Zw.A)
    zono = isinstance(Zx, Zonotope) and isinstance(Zw, Zonotope)
    return _same_kind(G, np.concatenate([Zx.c, Zw.c]), A, np.concatenate([Zx.b, Zw.b]), zono)


def intersect_cz(Z1: ConstrainedZonotope, Z2: ConstrainedZonotope, shared_generators: int = 0) -> ConstrainedZonotope:
    """Intersection where the first ``shared_generators`` latents of both operands coincide.

    Constraint rows of ``Z2`` that involve only the shared latents and
    already appear in ``Z1`` are not repeated.
    """
    if Z1.n != Z2.n:
        raise DimensionMismatch(f"dimensions {Z1.n} and {Z2.n}")
    s = int(shared_generators)
    if s > min(Z1.ng, Z2.ng):
        raise DimensionMismatch("more shared generators than either operand has")
    S1, R1 = Z1.G[:, :s], Z1.G[:, s:]
    S2, R2 = Z2.G[:, :s], Z2.G[:, s:]
    k1, k2 = R1.shape[1], R2.shape[1]
    A2, b2 = Z2.A, Z2.b
    if s and Z1.nc and Z2.nc:
        only_shared = ~np.any(A2[:, s:] != 0, axis=1)
        if only_shared.any():
            known = {np.append(row, rhs).tobytes()
                     for row, rhs in zip(Z1.A[:, :s], Z1.b)}
            drop = np.array([only_shared[i] and np.append(A2[i, :s], b2[i]).tobytes() in known
                             for i in range(Z2.nc)], dtype=bool)
            A2, b2 = A2[~drop], b2[~drop]
    G = np.hstack([S1, R1, np.zeros((Z1.n, k2))])
    A1 = np.hstack([Z1.A[:, :s], Z1.A[:, s:], np.zeros((Z1.nc, k2))])
    A2 = np.hstack([A2[:, :s], np.zeros((A2.shape[0], k1)), A2[:, s:]])
    Aeq = np.hstack([S1 - S2, R1, -R2])
    beq = Z2.c - Z1.c
    trivial = ~np.any(Aeq != 0, axis=1) & (beq == 0)
    A = np.vstack([A1, A2, Aeq[~trivial]])
    b = np.concatenate([Z1.b, b2, beq[~trivial]])
    return ConstrainedZonotope(G, Z1.c, A, b)


def generalized_linear_intersection(Zf: ConstrainedZonotope, R, Y: ConstrainedZonotope) -> ConstrainedZonotope:
    """``{z in Zf | R z in Y}``."""
    R = np.atleast_2d(np.asarray(R, float))
    if R.shape[0] != Y.n or R.shape[1] != Zf.n:
        raise DimensionMismatch(f"R {R.shape} incompatible with sets of dimension {Zf.n} -> {Y.n}")
    G = np.hstack([Zf.G, np.zeros((Zf.n, Y.ng))])
    A = np.vstack([
        _blkdiag(Zf.A, Y.A),
        np.hstack([R @ Zf.G, -Y.G]),
    ])
    b = np.concatenate([Zf.b, Y.b, Y.c - R @ Zf.c])
    return ConstrainedZonotope(G, Zf.c, A, b)


def zonotope_hull(Z: ConstrainedZonotope) -> Zonotope:
    """Drop the constraints; the result contains ``Z``."""
    return Zonotope(Z.G, Z.c)


def interval_hull(S) -> IntervalVector:
    """Axis-aligned box containing the intersection of the members of ``S``."""
    S = as_enclosure(S)
    lo = np.full(S.n, -np.inf)
    hi = np.full(S.n, np.inf)
    for m in S.members:
        h = m.interval_hull()
        lo = np.maximum(lo, h.lo)
        hi = np.minimum(hi, h.hi)
    if np.any(lo > hi + lp.FEAS_TOL):
        raise EmptySet("interval hulls of the members do not overlap")
    return IntervalVector(np.minimum(lo, hi), np.maximum(lo, hi))


def constraint_interval_bound(A, b, ng: int, tol: float = 1e-9) -> IntervalVector:
    """Box ``[l_lo, l_hi]`` in latent space containing every ``xi`` with ``A xi = b``, ``|xi| <= 1``.

    Coordinates left free by the pseudoinverse solution get ``[-1, 1]``;
    coordinates it pins are set to the pinned value.
    """
    A = np.asarray(A, float).reshape(-1, ng)
    b = np.atleast_1d(np.asarray(b, float))
    if A.shape[0] == 0:
        return IntervalVector.unit(ng)
    cutoff = max(A.shape) * np.finfo(float).eps
    pinv = np.linalg.pinv(A, rcond=cutoff)
    x0 = pinv @ b
    free = np.any(np.abs(np.eye(ng) - pinv @ A) > tol, axis=1)
    if np.any(~free & (np.abs(x0) > 1 + 1e-7)):
        raise EmptySet("the constraints pin a latent coordinate outside the unit box")
    pinned = np.clip(x0, -1.0, 1.0)
    lo = np.where(free, -1.0, pinned)
    hi = np.where(free, 1.0, pinned)
    return IntervalVector(lo, hi)


def latent_bounds(Z: ConstrainedZonotope) -> tuple[np.ndarray, np.ndarray]:
    """Exact LP bounds of each latent coordinate over ``A xi = b``, ``|xi| <= 1``."""
    ng = Z.ng
    if Z.nc == 0:
        return -np.ones(ng), np.ones(ng)
    A = np.ascontiguousarray(Z.A)
    rhs = Z.b + Z.A.sum(axis=1)
    up = np.full(ng, 2.0)
    lo, hi = np.empty(ng), np.empty(ng)
    for j in range(ng):
        for sign, out in ((1.0, lo), (-1.0, hi)):
            cost = np.zeros(ng)
            cost[j] = sign
            st, x, _ = lp.simplex_core(A, rhs, cost, up, False)
            if st == lp.INFEASIBLE:
                raise EmptySet("constrained zonotope is empty")
            if st != lp.OPTIMAL:
                raise lp.NumericalFailure(f"simplex status {st}")
            out[j] = x[j] - 1.0
    return lo, hi


def rescale(Z: ConstrainedZonotope, margin: float = RESCALE_MARGIN) -> ConstrainedZonotope:
    """Equivalent constrained zonotope whose latent box is the tight LP box.

    Each latent coordinate's reachable range ``[lo_j, hi_j]`` (padded by
    ``margin``) is mapped back to ``[-1, 1]``; pinned coordinates disappear.
    The set is unchanged but its zonotope hull shrinks.
    """
    if Z.nc == 0:
        return Z
    lo, hi = latent_bounds(Z)
    lo = np.maximum(lo - margin, -1.0)
    hi = np.minimum(hi + margin, 1.0)
    mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
    c = Z.c + Z.G @ mid
    b = Z.b - Z.A @ mid
    G = Z.G * rad
    A = Z.A * rad
    keep = rad > 0
    G, A = G[:, keep], A[:, keep]
    nonzero = np.any(np.abs(A) > 0, axis=1) | (np.abs(b) > lp.FEAS_TOL)
    A, b = A[nonzero], b[nonzero]
    if A.shape[0] == 0:
        return Zonotope(G, c)
    return ConstrainedZonotope(G, c, A, b)


def anchor_to_hull(Z: ConstrainedZonotope, margin: float = RESCALE_MARGIN) -> ConstrainedZonotope:
    """Equivalent constrained zonotope whose zonotope hull is the interval hull.

    The interval hull box is intersected with ``Z`` with the box as first
    operand, so the result keeps the box generators as its only output
    generators.  Nothing changes when ``Z`` has no constraints or its zonotope
    hull is already the interval hull.
    """
    if Z.nc == 0:
        return Z
    hull = Z.interval_hull()
    zrad = np.abs(Z.G).sum(axis=1)
    if np.all(zrad <= hull.rad + margin):
        return Z
    box = Zonotope(np.diag(hull.rad + margin), hull.mid)
    out = intersect_cz(box, Z, 0)
    return ConstrainedZonotope(out.G, out.c, out.A, out.b)


def membership(S, z, tol: float = lp.FEAS_TOL) -> bool:
    z = np.asarray(z, float)
    if isinstance(S, HPolytope):
        return S.contains(z, tol)
    return as_enclosure(S).contains(z, tol)


def mc_volume(S, samples: int, seed: int, hull: IntervalVector | None = None) -> tuple[float, float]:
    """Hit-or-miss volume estimate over the interval hull and its binomial standard error."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    S = as_enclosure(S)
    for m in S.members:
        if m.is_empty():
            raise EmptySet("an enclosure member is empty")
    hull = interval_hull(S) if hull is None else hull
    vol = hull.volume()
    if vol == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    Z = hull.lo + rng.random((samples, S.n)) * hull.diam
    p = S.contains_points(Z).mean()
    return float(p * vol), float(vol * math.sqrt(p * (1 - p) / samples))


def _clip_polygon(poly: list, normal, offset) -> list:
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        fp, fq = normal @ p - offset, normal @ q - offset
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
    return out


def project_2d(S, axes=(0, 1), directions: int = 64) -> np.ndarray:
    """Outer polygon of the projection onto ``axes`` from sampled support values.

    Returns the vertices in counter-clockwise order as an ``(m, 2)`` array.
    """
    if directions < 3:
        raise ValueError("need at least three directions")
    S = as_enclosure(S)
    i, j = axes
    hull = interval_hull(S)
    poly = [np.array(p, float) for p in (
        (hull.lo[i], hull.lo[j]), (hull.hi[i], hull.lo[j]),
        (hull.hi[i], hull.hi[j]), (hull.lo[i], hull.hi[j]))]
    for k in range(directions):
        th = 2 * math.pi * k / directions
        normal = np.array([math.cos(th), math.sin(th)])
        d = np.zeros(S.n)
        d[i], d[j] = normal
        h = S.support_bound(d)
        poly = _clip_polygon(poly, normal, h)
        if not poly:
            raise EmptySet("projection is empty")
    pts = np.array(poly)
    keep = [0] + [k for k in range(1, len(pts)) if np.linalg.norm(pts[k] - pts[k - 1]) > 1e-12]
    return pts[keep]


def polygon_area(poly) -> float:
    poly = np.asarray(poly, float)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polytope_to_cz(P: HPolytope) -> ConstrainedZonotope:
    """Exact constrained-zonotope form of a bounded H-polytope."""
    n = P.n
    lo, hi = np.empty(n), np.empty(n)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        try:
            hi[k] = lp.maximize(lp.LinearProgram(e, P.Ap, P.bp))[0]
            lo[k] = -lp.maximize(lp.LinearProgram(-e, P.Ap, P.bp))[0]
        except UnboundedProgram as err:
            raise UnboundedPolytope(f"polytope is unbounded along axis {k}") from err
        except InfeasibleProgram as err:
            raise EmptySet("polytope is empty") from err
    cb, rb = 0.5 * (hi + lo), 0.5 * (hi - lo)
    box_rows = P.Ap * rb
    sigma = P.bp - P.Ap @ cb + np.abs(P.Ap) @ rb
    sigma = np.maximum(sigma, 0.0)
    keep_box = rb > 0
    G = np.hstack([np.diag(rb)[:, keep_box], np.zeros((n, P.Ap.shape[0]))])
    A = np.hstack([box_rows[:, keep_box], np.diag(0.5 * sigma)])
    b = P.bp - P.Ap @ cb - 0.5 * sigma
    return ConstrainedZonotope(G, cb, A, b)


def template_directions(n: int) -> np.ndarray:
    """Unit directions ``+-e_i`` and ``(+-e_i +- e_j)/sqrt(2)``."""
    dirs = []
    eye = np.eye(n)
    for i in range(n):
        dirs += [eye[i], -eye[i]]
    for i, j in combinations(range(n), 2):
        for si in (1, -1):
            for sj in (1, -1):
                dirs.append((si * eye[i] + sj * eye[j]) / math.sqrt(2))
    return np.array(dirs)


def template_polytope(S, directions=None, exact: bool = True) -> HPolytope:
    """H-polytope with the given normals containing the enclosure."""
    S = as_enclosure(S)
    D = template_directions(S.n) if directions is None else np.asarray(directions, float)
    support = S.support if exact else S.support_bound
    h = np.array([support(d) for d in D])
    return HPolytope(D, h)


def bundle_directions(n: int) -> list[np.ndarray]:
    """Normal matrices of the parallelotopes used to turn an enclosure into a bundle."""
    mats = [np.eye(n)]
    if n == 1:
        return mats
    if n == 2:
        for deg in (22.5, 45.0, 67.5):
            t = math.radians(deg)
            mats.append(np.array([[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]]))
        return mats
    for i, j in combinations(range(n), 2):
        R = np.eye(n)
        s = 1 / math.sqrt(2)
        R[i, i] = R[j, j] = s
        R[i, j], R[j, i] = s, -s
        mats.append(R)
    return mats


def parallelotope(D, lo, hi) -> Zonotope:
    """Zonotope form of ``{z | lo <= D z <= hi}`` for invertible ``D``."""
    Dinv = np.linalg.inv(np.asarray(D, float))
    return Zonotope(Dinv * (0.5 * (np.asarray(hi) - np.asarray(lo))), Dinv @ (0.5 * (np.asarray(hi) + np.asarray(lo))))


def enclosure_to_bundle(S, direction_mats=None, exact: bool = True) -> ZonotopeBundle:
    """Bundle of bounding parallelotopes; contains the enclosure.

    With ``exact`` the parallelotopes touch the intersection; otherwise each
    face uses the smallest member support, which is cheaper but looser.
    """
    S = as_enclosure(S)
    support = S.support if exact else S.support_bound
    if all(m.nc == 0 for m in S.members) and direction_mats is None and len(S) == 1:
        return ZonotopeBundle(S.members)
    mats = bundle_directions(S.n) if direction_mats is None else direction_mats
    members = []
    for D in mats:
        hi = np.array([support(d) for d in D])
        lo = np.array([-support(-d) for d in D])
        members.append(parallelotope(D, np.minimum(lo, hi), np.maximum(lo, hi)))
    return ZonotopeBundle(members)


# -- serialisation -----------------------------------------------------------

def set_to_dict(S) -> dict:
    return S.to_dict()


def set_from_dict(d: dict):
    kind = d.get("type")
    if kind == "zonotope":
        return Zonotope(d["G"], d["c"])
    if kind == "czonotope":
        c = np.asarray(d["c"], float)
        G = np.asarray(d["G"], float).reshape(c.size, -1)
        A = np.asarray(d.get("A", []), float).reshape(-1, G.shape[1])
        return ConstrainedZonotope(G, c, A, d.get("b", []))
    if kind == "box":
        return Zonotope.from_box(d["lo"], d["hi"])
    if kind == "bundle":
        return ZonotopeBundle([set_from_dict(m) for m in d["members"]])
    if kind == "enclosure":
        return SetEnclosure([set_from_dict(m) for m in d["members"]])
    raise ValueError(f"unknown set type {kind!r}")
