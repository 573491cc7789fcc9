"""Closed-interval scalars, vectors and matrices.

Arithmetic is plain floating point.  A module-level outward inflation
``OUTWARD_EPS`` (default ``0.0``) is subtracted from every lower endpoint and
added to every upper endpoint produced by scalar arithmetic; set it with
:func:`set_outward_eps` when a small safety margin against rounding is wanted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    DivisionByIntervalContainingZero,
    EmptyInterval,
    IntervalDomainError,
)

OUTWARD_EPS = 0.0


def set_outward_eps(eps: float) -> float:
    """Set the global outward inflation and return the previous value."""
    global OUTWARD_EPS
    if eps < 0:
        raise ValueError("outward inflation must be non-negative")
    old, OUTWARD_EPS = OUTWARD_EPS, float(eps)
    return old


def _emul(a: float, b: float) -> float:
    """Endpoint product with ``0 * inf = 0``."""
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _out(lo: float, hi: float) -> "Interval":
    if OUTWARD_EPS:
        return Interval(lo - OUTWARD_EPS, hi + OUTWARD_EPS)
    return Interval(lo, hi)


def _coerce(x) -> "Interval":
    if isinstance(x, Interval):
        return x
    if isinstance(x, _EmptyIntervalType):
        raise EmptyInterval("operation on the empty interval")
    return Interval(float(x), float(x))


@dataclass(frozen=True, slots=True)
class Interval:
    """The closed interval ``[lo, hi]`` with ``lo <= hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise EmptyInterval(
                f"lo={self.lo!r} > hi={self.hi!r}; use EMPTY for the empty interval"
            )

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(float(x), float(x))

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def diam(self) -> float:
        return self.hi - self.lo

    @property
    def rad(self) -> float:
        return 0.5 * (self.hi - self.lo)

    is_empty = False

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def subset_of(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0.0 <= self.hi

    def intersect(self, other: "Interval"):
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else EMPTY

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def __add__(self, other):
        o = _coerce(other)
        return _out(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        return _out(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other):
        o = _coerce(other)
        p = (_emul(self.lo, o.lo), _emul(self.lo, o.hi), _emul(self.hi, o.lo), _emul(self.hi, o.hi))
        return _out(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o.contains_zero():
            raise DivisionByIntervalContainingZero(f"division by {o}")
        return self * Interval(1.0 / o.hi, 1.0 / o.lo)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, (int, np.integer)):
            raise TypeError("only integer powers are supported")
        n = int(n)
        if n == 0:
            return Interval(1.0, 1.0)
        if n < 0:
            return Interval(1.0, 1.0) / self ** (-n)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 1 or self.lo >= 0:
            return _out(min(a, b), max(a, b))
        if self.hi <= 0:
            return _out(min(a, b), max(a, b))
        return _out(0.0, max(a, b))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


class _EmptyIntervalType:
    """The empty interval; a distinct variant rather than ``lo > hi``."""

    __slots__ = ()
    is_empty = True

    def __repr__(self):
        return "EMPTY"

    def contains(self, x, tol=0.0):
        return False

    def intersect(self, other):
        return self

    def hull(self, other):
        return other


EMPTY = _EmptyIntervalType()


def interval_arith(a: Interval, b: Interval, op: str) -> Interval:
    """Apply ``op`` in ``{'+', '-', '*', '/'}`` (unicode minus/times/divide accepted)."""
    a, b = _coerce(a), _coerce(b)
    if op in ("+",):
        return a + b
    if op in ("-", "−"):
        return a - b
    if op in ("*", "×", "x"):
        return a * b
    if op in ("/", "÷"):
        return a / b
    raise ValueError(f"unknown operator {op!r}")


# -- elementary functions -------------------------------------------------

def isqrt(x: Interval) -> Interval:
    x = _coerce(x)
    if x.lo < 0:
        raise IntervalDomainError(f"sqrt of {x}")
    return _out(math.sqrt(x.lo), math.sqrt(x.hi))


def _contains_point_of(lo: float, hi: float, offset: float, period: float) -> bool:
    # is there an integer k with lo <= offset + k*period <= hi
    k = math.ceil((lo - offset) / period)
    return offset + k * period <= hi


def isin(x: Interval) -> Interval:
    x = _coerce(x)
    if x.diam >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = math.sin(x.lo), math.sin(x.hi)
    lo, hi = min(a, b), max(a, b)
    if _contains_point_of(x.lo, x.hi, 0.5 * math.pi, 2 * math.pi):
        hi = 1.0
    if _contains_point_of(x.lo, x.hi, -0.5 * math.pi, 2 * math.pi):
        lo = -1.0
    return _out(lo, hi)


def icos(x: Interval) -> Interval:
    x = _coerce(x)
    if x.diam >= 2 * math.pi:
        return Interval(-1.0, 1.0)
    a, b = math.cos(x.lo), math.cos(x.hi)
    lo, hi = min(a, b), max(a, b)
    if _contains_point_of(x.lo, x.hi, 0.0, 2 * math.pi):
        hi = 1.0
    if _contains_point_of(x.lo, x.hi, math.pi, 2 * math.pi):
        lo = -1.0
    return _out(lo, hi)


def iatan(x: Interval) -> Interval:
    x = _coerce(x)
    return _out(math.atan(x.lo), math.atan(x.hi))


# -- vectors and matrices --------------------------------------------------

class IntervalVector:
    """Box ``[lo, hi]`` in R^n stored as two float arrays."""

    def __init__(self, lo, hi=None):
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = lo.copy() if hi is None else np.atleast_1d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionMismatch(f"lo {lo.shape} and hi {hi.shape} must be equal 1-D shapes")
        if lo.size == 0:
            raise EmptyInterval("interval vector has no entries")
        if np.any(~(lo <= hi)):
            raise EmptyInterval("some lower bound exceeds its upper bound")
        self.lo, self.hi = lo, hi

    @classmethod
    def from_intervals(cls, entries: Iterable[Interval]) -> "IntervalVector":
        entries = [_coerce(e) for e in entries]
        return cls([e.lo for e in entries], [e.hi for e in entries])

    @classmethod
    def from_centered(cls, center, halfwidths) -> "IntervalVector":
        center = np.asarray(center, float)
        halfwidths = np.asarray(halfwidths, float)
        return cls(center - halfwidths, center + halfwidths)

    @classmethod
    def unit(cls, n: int) -> "IntervalVector":
        return cls(-np.ones(n), np.ones(n))

    def __len__(self):
        return self.lo.size

    def __getitem__(self, i) -> Interval:
        return Interval(float(self.lo[i]), float(self.hi[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def diam(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def volume(self) -> float:
        return float(np.prod(self.diam))

    def contains(self, z, tol: float = 0.0) -> bool:
        z = np.asarray(z, float)
        return bool(np.all(self.lo - tol <= z) and np.all(z <= self.hi + tol))

    def intersect(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi))

    def to_list(self) -> list[Interval]:
        return list(self)

    def __repr__(self):
        return f"IntervalVector(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


class IntervalMatrix:
    """Element-wise interval matrix ``[lo, hi]``."""

    def __init__(self, lo, hi=None):
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = lo.copy() if hi is None else np.atleast_2d(np.asarray(hi, dtype=float))
        if lo.shape != hi.shape:
            raise DimensionMismatch(f"lo {lo.shape} and hi {hi.shape} differ")
        if lo.size == 0:
            raise EmptyInterval("interval matrix has no entries")
        if np.any(~(lo <= hi)):
            raise EmptyInterval("some lower bound exceeds its upper bound")
        self.lo, self.hi = lo, hi

    @classmethod
    def from_intervals(cls, rows: Sequence[Sequence[Interval]]) -> "IntervalMatrix":
        rows = [[_coerce(e) for e in row] for row in rows]
        return cls([[e.lo for e in r] for r in rows], [[e.hi for e in r] for r in rows])

    @property
    def shape(self):
        return self.lo.shape

    def __getitem__(self, ij) -> Interval:
        i, j = ij
        return Interval(float(self.lo[i, j]), float(self.hi[i, j]))

    @property
    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def diam(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def rad(self) -> np.ndarray:
        return 0.5 * (self.hi - self.lo)

    def contains(self, J, tol: float = 0.0) -> bool:
        J = np.asarray(J, float)
        return bool(np.all(self.lo - tol <= J) and np.all(J <= self.hi + tol))

    def subset_of(self, other: "IntervalMatrix", tol: float = 0.0) -> bool:
        return bool(np.all(other.lo - tol <= self.lo) and np.all(self.hi <= other.hi + tol))

    def intersect(self, other: "IntervalMatrix") -> "IntervalMatrix":
        lo, hi = np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi)
        if np.any(lo > hi):
            raise EmptyInterval("interval matrices do not overlap")
        return IntervalMatrix(lo, hi)

    def rmatmul_real(self, G) -> "IntervalMatrix":
        """Exact enclosure of ``{J @ G : J in self}`` for a real matrix ``G``."""
        G = np.atleast_2d(np.asarray(G, float))
        if G.shape[0] != self.shape[1]:
            raise DimensionMismatch(f"{self.shape} @ {G.shape}")
        m = self.mid @ G
        r = self.rad @ np.abs(G)
        return IntervalMatrix(m - r, m + r)

    def matvec(self, x) -> IntervalVector:
        """Enclosure of ``{J @ x : J in self}`` for a real vector ``x``."""
        x = np.asarray(x, float)
        m = self.mid @ x
        r = self.rad @ np.abs(x)
        return IntervalVector(m - r, m + r)

    def __repr__(self):
        return f"IntervalMatrix(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


def centered_form(v: IntervalVector) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(center, halfwidths)`` with ``v = center + diag(halfwidths) B``."""
    if not isinstance(v, IntervalVector):
        v = IntervalVector.from_intervals(v)
    return v.mid, v.rad


def split_matrix(J: IntervalMatrix) -> tuple[np.ndarray, IntervalMatrix]:
    """Split ``J`` into its midpoint and the zero-centred remainder ``J_delta``."""
    if not isinstance(J, IntervalMatrix):
        J = IntervalMatrix.from_intervals(J)
    r = J.rad
    return J.mid, IntervalMatrix(-r, r)
