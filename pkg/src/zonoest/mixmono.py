"""Remainder-form mixed-monotone bounds.

A map ``f`` on a box is split as ``f(xi) = g(xi) + H xi`` where each entry of
``H`` is one of the clipped Jacobian bounds ``min(J_lo, 0)`` or
``max(J_hi, 0)``.  That choice makes every partial derivative of ``g``
sign-stable on the box, so ``g`` attains its extrema at box corners picked
entry by entry from the sign pattern.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence, Union

import numpy as np

from .exceptions import DimensionMismatch, ExhaustiveTooLarge
from .expr import Const, Expr, eval_point, interval_eval, jacobian_bounds_over_box
from .interval import IntervalMatrix, IntervalVector

EXHAUSTIVE_LIMIT = 16
# Padding applied when decomposition bounds are turned into sets, to absorb
# rounding in the corner evaluations.
BOUND_PAD = 1e-12

FunctionLike = Union[Sequence[Expr], Callable[[np.ndarray], np.ndarray]]


class Sign(enum.Enum):
    NON_NEGATIVE = "nonneg"   # H_ij = min(J_lo, 0): g nondecreasing in xi_j
    NON_POSITIVE = "nonpos"   # H_ij = max(J_hi, 0): g nonincreasing in xi_j


@dataclass(frozen=True, eq=False)
class DecompositionSelection:
    """A matrix ``H`` of the family plus its sign pattern.

    ``nonpos[i, j]`` is True when ``H[i, j] = max(J_hi[i, j], 0)``.
    """

    H: np.ndarray
    nonpos: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, float))
        nonpos = np.asarray(self.nonpos, bool).reshape(H.shape)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "nonpos", nonpos)

    @property
    def shape(self):
        return self.H.shape

    @property
    def sign_pattern(self) -> list[list[Sign]]:
        return [[Sign.NON_POSITIVE if s else Sign.NON_NEGATIVE for s in row] for row in self.nonpos]

    @classmethod
    def from_choice(cls, Jlo, Jhi, upper) -> "DecompositionSelection":
        """Selection that takes ``max(J_hi, 0)`` where ``upper`` is True."""
        Jlo, Jhi = np.asarray(Jlo, float), np.asarray(Jhi, float)
        upper = np.asarray(upper, bool)
        H = np.where(upper, np.maximum(Jhi, 0.0), np.minimum(Jlo, 0.0))
        return cls(H, upper)

    def key(self) -> bytes:
        return self.H.tobytes() + self.nonpos.tobytes()


def _check_bounds(Jlo, Jhi):
    Jlo = np.atleast_2d(np.asarray(Jlo, float))
    Jhi = np.atleast_2d(np.asarray(Jhi, float))
    if Jlo.shape != Jhi.shape:
        raise DimensionMismatch("Jacobian bound shapes differ")
    if np.any(Jlo > Jhi):
        raise ValueError("Jacobian lower bound exceeds upper bound")
    return Jlo, Jhi


def parse_strategy(strategy) -> tuple[str, int]:
    """Normalise ``'canonical'``, ``'canonical+K'``, ``'exhaustive'`` or ``('canonical+', K)``."""
    if isinstance(strategy, tuple):
        name, k = strategy
        return ("canonical+" if int(k) else "canonical"), int(k)
    s = str(strategy).strip().lower()
    if s in ("canonical", "exhaustive"):
        return s, 0
    m = re.fullmatch(r"canonical\s*\+\s*(\d+)", s)
    if m:
        return "canonical+", int(m.group(1))
    raise ValueError(f"unknown family strategy {strategy!r}")


def build_h_family(Jlo, Jhi, strategy="canonical", seed: int = 0) -> list[DecompositionSelection]:
    """Matrices ``H`` with entries drawn from ``{min(J_lo, 0), max(J_hi, 0)}``.

    ``canonical`` gives the all-lower and all-upper choices; ``canonical+K``
    adds ``K`` random choices drawn with ``seed``; ``exhaustive`` lists every
    choice and is limited to at most 16 entries.
    """
    Jlo, Jhi = _check_bounds(Jlo, Jhi)
    name, k = parse_strategy(strategy)
    if name == "exhaustive":
        if Jlo.size > EXHAUSTIVE_LIMIT:
            raise ExhaustiveTooLarge(f"{Jlo.size} entries give 2^{Jlo.size} matrices (limit 2^{EXHAUSTIVE_LIMIT})")
        return [DecompositionSelection.from_choice(Jlo, Jhi, np.array(bits, bool).reshape(Jlo.shape))
                for bits in product((False, True), repeat=Jlo.size)]
    fam = [
        DecompositionSelection.from_choice(Jlo, Jhi, np.zeros(Jlo.shape, bool)),
        DecompositionSelection.from_choice(Jlo, Jhi, np.ones(Jlo.shape, bool)),
    ]
    if k:
        rng = np.random.default_rng(seed)
        for _ in range(k):
            fam.append(DecompositionSelection.from_choice(Jlo, Jhi, rng.random(Jlo.shape) < 0.5))
    return fam


def aligned_selection(Jlo, Jhi) -> DecompositionSelection:
    """Per entry, the admissible choice nearest the middle of the Jacobian bound.

    For a linear map this choice reproduces the Jacobian itself, so the
    remainder has zero width.
    """
    Jlo, Jhi = _check_bounds(Jlo, Jhi)
    upper = np.where(Jlo >= 0, True, np.where(Jhi <= 0, False, Jlo + Jhi >= 0))
    return DecompositionSelection.from_choice(Jlo, Jhi, upper)


def pipeline_family(Jlo, Jhi, strategy="canonical", seed: int = 0) -> list[DecompositionSelection]:
    """``build_h_family`` plus the aligned member, without duplicates."""
    fam = build_h_family(Jlo, Jhi, strategy, seed) + [aligned_selection(Jlo, Jhi)]
    seen, out = set(), []
    for sel in fam:
        if sel.key() not in seen:
            seen.add(sel.key())
            out.append(sel)
    return out


def corner_point(sel: DecompositionSelection, row: int, z, zhat) -> np.ndarray:
    """``zhat_j`` where row ``row`` is sign-pattern non-positive, ``z_j`` elsewhere."""
    z, zhat = np.asarray(z, float), np.asarray(zhat, float)
    return np.where(sel.nonpos[row], zhat, z)


def _as_callable(f: FunctionLike) -> Callable[[np.ndarray], np.ndarray]:
    if callable(f) and not isinstance(f, (list, tuple)):
        return f
    exprs = list(f)
    return lambda P: eval_point(exprs, P)


def _box_arrays(box) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(box, IntervalVector):
        return box.lo, box.hi
    lo, hi = box
    return np.asarray(lo, float), np.asarray(hi, float)


def jss_remainder_bounds(f_tilde: FunctionLike, sel: DecompositionSelection, box) -> tuple[np.ndarray, np.ndarray]:
    """Exact bounds of ``g(xi) = f_tilde(xi) - H xi`` over ``box`` by corner evaluation.

    ``f_tilde`` is a list of expressions or a callable mapping an
    ``(n, N)`` array of points to an ``(m, N)`` array.
    """
    lo, hi = _box_arrays(box)
    m, n = sel.shape
    if lo.size != n:
        raise DimensionMismatch(f"box has {lo.size} coordinates, H has {n} columns")
    f = _as_callable(f_tilde)
    up = np.where(sel.nonpos, lo, hi)     # row i: maximiser of g_i
    dn = np.where(sel.nonpos, hi, lo)     # row i: minimiser of g_i
    P = np.hstack([up.T, dn.T])           # (n, 2m)
    vals = np.asarray(f(P), float).reshape(m, 2 * m)
    idx = np.arange(m)
    g_hi = vals[idx, idx] - np.einsum("ij,ij->i", sel.H, up)
    g_lo = vals[idx, m + idx] - np.einsum("ij,ij->i", sel.H, dn)
    return g_lo, g_hi


def decomposition_function(f_tilde: FunctionLike, sel: DecompositionSelection, x, xhat) -> np.ndarray:
    """``f_d(x, xhat)``: nondecreasing in ``x``, nonincreasing in ``xhat``, ``f_d(x, x) = f(x)``."""
    x, xhat = np.asarray(x, float), np.asarray(xhat, float)
    f = _as_callable(f_tilde)
    m, _ = sel.shape
    corners = np.where(sel.nonpos, xhat, x)      # (m, n)
    vals = np.asarray(f(corners.T), float).reshape(m, m)
    g = np.diag(vals) - np.einsum("ij,ij->i", sel.H, corners)
    Hpos, Hneg = np.maximum(sel.H, 0.0), np.minimum(sel.H, 0.0)
    return g + Hpos @ x + Hneg @ xhat


def linear_range(H, box) -> tuple[np.ndarray, np.ndarray]:
    """Exact range of ``H xi`` over a box."""
    lo, hi = _box_arrays(box)
    H = np.atleast_2d(H)
    mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return H @ mid - np.abs(H) @ rad, H @ mid + np.abs(H) @ rad


def function_bounds(f: FunctionLike, Jlo, Jhi, box, strategy="canonical", seed: int = 0) -> IntervalVector:
    """Bounds of ``f`` over ``box``: intersection over the family of ``[g_lo, g_hi] + H box``."""
    lo = hi = None
    for sel in pipeline_family(Jlo, Jhi, strategy, seed):
        g_lo, g_hi = jss_remainder_bounds(f, sel, box)
        l_lo, l_hi = linear_range(sel.H, box)
        a, b = g_lo + l_lo, g_hi + l_hi
        lo = a if lo is None else np.maximum(lo, a)
        hi = b if hi is None else np.minimum(hi, b)
    pad = BOUND_PAD * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
    lo, hi = lo - pad, hi + pad
    return IntervalVector(np.minimum(lo, hi), np.maximum(lo, hi))


def bound_jacobian_via_decomposition(jac: Sequence[Sequence[Expr]], hess: Sequence[Sequence[Sequence[Expr]]],
                                     box, strategy="canonical", seed: int = 0) -> IntervalMatrix:
    """Jacobian bounds over ``box`` refined entry by entry.

    Each entry is bounded as a scalar function with the remainder-form
    decomposition (its gradient is the matching Hessian row), and the result
    is intersected with the natural interval extension.
    """
    if not isinstance(box, IntervalVector):
        box = IntervalVector(*_box_arrays(box))
    plain = jacobian_bounds_over_box(jac, box)
    lo, hi = plain.lo.copy(), plain.hi.copy()
    for i, row in enumerate(jac):
        for j, entry in enumerate(row):
            if isinstance(entry, Const):
                continue
            grad = interval_eval(hess[i][j], box)
            dec = function_bounds([entry], grad.lo[None, :], grad.hi[None, :], box, strategy, seed)
            lo[i, j] = max(lo[i, j], dec.lo[0])
            hi[i, j] = min(hi[i, j], dec.hi[0])
            if lo[i, j] > hi[i, j]:
                # Only rounding can cause this; fall back to the plain bound.
                lo[i, j], hi[i, j] = plain.lo[i, j], plain.hi[i, j]
    return IntervalMatrix(lo, hi)
