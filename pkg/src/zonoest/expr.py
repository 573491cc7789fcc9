"""Small immutable expression trees.

Nodes cover constants, variables, ``+ - * /``, integer powers, ``sqrt``,
``sin``, ``cos`` and ``arctan``.  Every tree supports vectorised point
evaluation, symbolic differentiation (closed under the node set), natural
interval extension and substitution of variables by other expressions.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .exceptions import (
    DimensionMismatch,
    DivisionByIntervalContainingZero,
    DomainError,
    IntervalDomainError,
)
from .interval import Interval, IntervalMatrix, IntervalVector, iatan, icos, isin, isqrt


class Expr:
    __slots__ = ()

    # subclasses implement: evaluate, interval, diff, substitute, max_index, _str

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        return power(self, n)

    def __repr__(self):
        return self._str()

    @property
    def arity(self) -> int:
        return self.max_index() + 1

    def is_const(self, value=None) -> bool:
        return False


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def evaluate(self, x):
        return self.value

    def interval(self, box):
        return Interval(self.value, self.value)

    def diff(self, j):
        return ZERO

    def substitute(self, subs):
        return self

    def max_index(self):
        return -1

    def is_const(self, value=None):
        return value is None or self.value == value

    def _str(self):
        return repr(self.value)


class Var(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("variable index must be non-negative")
        self.index = int(index)

    def evaluate(self, x):
        return x[self.index]

    def interval(self, box):
        return box[self.index]

    def diff(self, j):
        return ONE if j == self.index else ZERO

    def substitute(self, subs):
        return subs[self.index]

    def max_index(self):
        return self.index

    def _str(self):
        return f"x{self.index}"


class _Binary(Expr):
    __slots__ = ("a", "b")

    def __init__(self, a: Expr, b: Expr):
        self.a, self.b = a, b

    def max_index(self):
        return max(self.a.max_index(), self.b.max_index())


class Add(_Binary):
    __slots__ = ()

    def evaluate(self, x):
        return self.a.evaluate(x) + self.b.evaluate(x)

    def interval(self, box):
        return self.a.interval(box) + self.b.interval(box)

    def diff(self, j):
        return add(self.a.diff(j), self.b.diff(j))

    def substitute(self, subs):
        return add(self.a.substitute(subs), self.b.substitute(subs))

    def _str(self):
        return f"({self.a._str()} + {self.b._str()})"


class Sub(_Binary):
    __slots__ = ()

    def evaluate(self, x):
        return self.a.evaluate(x) - self.b.evaluate(x)

    def interval(self, box):
        return self.a.interval(box) - self.b.interval(box)

    def diff(self, j):
        return sub(self.a.diff(j), self.b.diff(j))

    def substitute(self, subs):
        return sub(self.a.substitute(subs), self.b.substitute(subs))

    def _str(self):
        return f"({self.a._str()} - {self.b._str()})"


class Mul(_Binary):
    __slots__ = ()

    def evaluate(self, x):
        return self.a.evaluate(x) * self.b.evaluate(x)

    def interval(self, box):
        a = self.a.interval(box)
        if self.a is self.b:
            return a ** 2
        return a * self.b.interval(box)

    def diff(self, j):
        return add(mul(self.a.diff(j), self.b), mul(self.a, self.b.diff(j)))

    def substitute(self, subs):
        return mul(self.a.substitute(subs), self.b.substitute(subs))

    def _str(self):
        return f"({self.a._str()} * {self.b._str()})"


class Div(_Binary):
    __slots__ = ()

    def evaluate(self, x):
        den = self.b.evaluate(x)
        if np.any(np.asarray(den) == 0):
            raise DomainError(f"division by zero in {self}")
        return self.a.evaluate(x) / den

    def interval(self, box):
        try:
            return self.a.interval(box) / self.b.interval(box)
        except DivisionByIntervalContainingZero as err:
            raise IntervalDomainError(f"denominator of {self} contains zero") from err

    def diff(self, j):
        da, db = self.a.diff(j), self.b.diff(j)
        if db.is_const(0.0):
            return div(da, self.b)
        return sub(div(da, self.b), div(mul(self.a, db), power(self.b, 2)))

    def substitute(self, subs):
        return div(self.a.substitute(subs), self.b.substitute(subs))

    def _str(self):
        return f"({self.a._str()} / {self.b._str()})"


class _Unary(Expr):
    __slots__ = ("a",)

    def __init__(self, a: Expr):
        self.a = a

    def max_index(self):
        return self.a.max_index()

    def substitute(self, subs):
        return type(self)(self.a.substitute(subs))


class Neg(_Unary):
    __slots__ = ()

    def evaluate(self, x):
        return -self.a.evaluate(x)

    def interval(self, box):
        return -self.a.interval(box)

    def diff(self, j):
        return neg(self.a.diff(j))

    def substitute(self, subs):
        return neg(self.a.substitute(subs))

    def _str(self):
        return f"-{self.a._str()}"


class Pow(Expr):
    __slots__ = ("a", "n")

    def __init__(self, a: Expr, n: int):
        self.a, self.n = a, int(n)

    def evaluate(self, x):
        base = self.a.evaluate(x)
        if self.n < 0 and np.any(np.asarray(base) == 0):
            raise DomainError(f"zero to a negative power in {self}")
        return base ** float(self.n) if self.n < 0 else base ** self.n

    def interval(self, box):
        try:
            return self.a.interval(box) ** self.n
        except DivisionByIntervalContainingZero as err:
            raise IntervalDomainError(f"base of {self} contains zero") from err

    def diff(self, j):
        da = self.a.diff(j)
        return mul(mul(Const(self.n), power(self.a, self.n - 1)), da)

    def substitute(self, subs):
        return power(self.a.substitute(subs), self.n)

    def max_index(self):
        return self.a.max_index()

    def _str(self):
        return f"{self.a._str()}^{self.n}"


class Sqrt(_Unary):
    __slots__ = ()

    def evaluate(self, x):
        v = self.a.evaluate(x)
        if np.any(np.asarray(v) < 0):
            raise DomainError(f"sqrt of a negative number in {self}")
        return np.sqrt(v)

    def interval(self, box):
        return isqrt(self.a.interval(box))

    def diff(self, j):
        return div(self.a.diff(j), mul(Const(2.0), self))

    def _str(self):
        return f"sqrt({self.a._str()})"


class Sin(_Unary):
    __slots__ = ()

    def evaluate(self, x):
        return np.sin(self.a.evaluate(x))

    def interval(self, box):
        return isin(self.a.interval(box))

    def diff(self, j):
        return mul(Cos(self.a), self.a.diff(j))

    def _str(self):
        return f"sin({self.a._str()})"


class Cos(_Unary):
    __slots__ = ()

    def evaluate(self, x):
        return np.cos(self.a.evaluate(x))

    def interval(self, box):
        return icos(self.a.interval(box))

    def diff(self, j):
        return neg(mul(Sin(self.a), self.a.diff(j)))

    def _str(self):
        return f"cos({self.a._str()})"


class Atan(_Unary):
    __slots__ = ()

    def evaluate(self, x):
        return np.arctan(self.a.evaluate(x))

    def interval(self, box):
        return iatan(self.a.interval(box))

    def diff(self, j):
        return div(self.a.diff(j), add(ONE, power(self.a, 2)))

    def _str(self):
        return f"arctan({self.a._str()})"


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else Const(x)


# -- simplifying constructors ----------------------------------------------

def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if a.is_const(0.0):
        return b
    if b.is_const(0.0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if b.is_const(0.0):
        return a
    if a.is_const(0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if a.is_const(0.0) or b.is_const(0.0):
        return ZERO
    if a.is_const(1.0):
        return b
    if b.is_const(1.0):
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if b.is_const(0.0):
        raise DomainError("division by the constant zero")
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    if a.is_const(0.0):
        return ZERO
    if b.is_const(1.0):
        return a
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def power(a: Expr, n: int) -> Expr:
    if not isinstance(n, (int, np.integer)):
        raise TypeError("only integer powers are supported")
    n = int(n)
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value ** n)
    return Pow(a, n)


def sqrt(a) -> Expr:
    a = as_expr(a)
    if isinstance(a, Const):
        if a.value < 0:
            raise DomainError("sqrt of a negative constant")
        return Const(math.sqrt(a.value))
    return Sqrt(a)


def sin(a) -> Expr:
    a = as_expr(a)
    return Const(math.sin(a.value)) if isinstance(a, Const) else Sin(a)


def cos(a) -> Expr:
    a = as_expr(a)
    return Const(math.cos(a.value)) if isinstance(a, Const) else Cos(a)


def arctan(a) -> Expr:
    a = as_expr(a)
    return Const(math.atan(a.value)) if isinstance(a, Const) else Atan(a)


def variables(n: int) -> list[Var]:
    return [Var(i) for i in range(n)]


# -- vector helpers ----------------------------------------------------------

def _check_arity(exprs: Sequence[Expr], n: int):
    for e in exprs:
        if e.max_index() >= n:
            raise DimensionMismatch(f"{e} uses x{e.max_index()} but only {n} values were given")


def eval_point(exprs: Sequence[Expr], p) -> np.ndarray:
    """Evaluate each expression at ``p``.

    ``p`` may be a vector of length ``n`` or an ``(n, N)`` array holding ``N``
    points column-wise; the result has shape ``(len(exprs),)`` or
    ``(len(exprs), N)`` respectively.
    """
    p = np.asarray(p, dtype=float)
    _check_arity(exprs, p.shape[0])
    if p.ndim == 1 and not np.all(np.isfinite(p)):
        raise DomainError("evaluation point is not finite")
    cols = [p[i] for i in range(p.shape[0])]
    out = [np.broadcast_to(e.evaluate(cols), p.shape[1:]) for e in exprs]
    return np.array(out, dtype=float)


def jacobian_exprs(exprs: Sequence[Expr], n: int) -> list[list[Expr]]:
    """Symbolic Jacobian grid ``[[d e_i / d x_j]]`` with ``n`` columns."""
    return [[e.diff(j) for j in range(n)] for e in exprs]


def interval_eval(exprs: Sequence[Expr], box) -> IntervalVector:
    if isinstance(box, IntervalVector):
        box = box.to_list()
    vals = [e.interval(box) for e in exprs]
    return IntervalVector.from_intervals(vals)


def jacobian_bounds_over_box(jac: Sequence[Sequence[Expr]], box) -> IntervalMatrix:
    """Natural interval extension of a Jacobian grid over ``box``."""
    if isinstance(box, IntervalVector):
        box = box.to_list()
    n = len(box)
    for row in jac:
        _check_arity(row, n)
    return IntervalMatrix.from_intervals([[e.interval(box) for e in row] for row in jac])


def compose_affine(exprs: Sequence[Expr], G, c) -> list[Expr]:
    """Return expressions in ``xi`` equal to ``exprs`` evaluated at ``G xi + c``."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if G.shape[0] != c.size:
        raise DimensionMismatch(f"G has {G.shape[0]} rows but c has {c.size} entries")
    _check_arity(exprs, c.size)
    xi = variables(G.shape[1])
    subs = []
    for i in range(G.shape[0]):
        term: Expr = Const(c[i])
        for j in range(G.shape[1]):
            if G[i, j] != 0.0:
                term = add(term, mul(Const(G[i, j]), xi[j]))
        subs.append(term)
    return [e.substitute(subs) for e in exprs]
