"""Dense two-phase simplex for the small LPs behind set membership and support functions.

The core works on ``min c.x  s.t.  A x = b,  0 <= x <= u`` with a
bounded-variable tableau: nonbasic variables sit at either bound, so upper
bounds never become rows.  Pricing is Dantzig's rule; after a run of
degenerate pivots the solver switches to Bland's rule for the rest of the
solve.  The kernels are compiled with numba when it is importable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, InfeasibleProgram, NumericalFailure, UnboundedProgram

try:
    from numba import njit
except ImportError:  # pragma: no cover - exercised only without numba
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10
OPT_TOL = 1e-10
DEGENERATE_SWITCH = 50

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = 0, 1, 2, 3


@njit(cache=True)
def _iterate(T, xB, d, basis, status, upper, ncols, max_iter, bland):
    m = T.shape[0]
    it = 0
    degenerate = 0
    while it < max_iter:
        it += 1
        q = -1
        best = 0.0
        for j in range(ncols):
            if status[j] == 2:
                continue
            dj = d[j]
            if status[j] == 0 and dj < -OPT_TOL:
                score = -dj
            elif status[j] == 1 and dj > OPT_TOL:
                score = dj
            else:
                continue
            if bland:
                q = j
                break
            if score > best:
                best = score
                q = j
        if q < 0:
            return OPTIMAL, bland
        dirn = 1.0 if status[q] == 0 else -1.0
        tmax = upper[q]
        r = -1
        to_upper = False
        rbest = 0.0
        for i in range(m):
            a = T[i, q] * dirn
            if a > PIVOT_TOL:
                t = max(xB[i], 0.0) / a
                up = False
            elif a < -PIVOT_TOL:
                ub = upper[basis[i]]
                if ub == np.inf:
                    continue
                t = max(ub - xB[i], 0.0) / (-a)
                up = True
            else:
                continue
            take = False
            if t < tmax - 1e-12:
                take = True
            elif t <= tmax + 1e-12 and r >= 0:
                if bland:
                    take = basis[i] < basis[r]
                else:
                    take = abs(a) > rbest
            if take:
                tmax = t
                r = i
                to_upper = up
                rbest = abs(a)
        if tmax == np.inf:
            return UNBOUNDED, bland
        if tmax < 1e-12:
            degenerate += 1
            if degenerate > DEGENERATE_SWITCH:
                bland = True
        else:
            degenerate = 0
        step = tmax * dirn
        for i in range(m):
            xB[i] -= step * T[i, q]
        if r < 0:
            status[q] = 1 - status[q]
            continue
        leaving = basis[r]
        status[leaving] = 1 if to_upper else 0
        entering_value = tmax if dirn > 0 else upper[q] - tmax
        piv = T[r, q]
        T[r, :] /= piv
        for i in range(m):
            if i != r:
                f = T[i, q]
                if f != 0.0:
                    T[i, :] -= f * T[r, :]
        f = d[q]
        if f != 0.0:
            d -= f * T[r, :]
        basis[r] = q
        status[q] = 2
        xB[r] = entering_value
    return ITERATION_LIMIT, bland


@njit(cache=True)
def simplex_core(A, b, cost, upper, phase1_only):
    """Solve ``min cost.x, A x = b, 0 <= x <= upper``.

    Returns ``(status, x, objective)`` where ``status`` is one of the module
    constants; for infeasible problems ``objective`` is the phase-1 residual.
    """
    m, n = A.shape
    x = np.zeros(n)
    if m == 0:
        if phase1_only:
            return OPTIMAL, x, 0.0
        obj = 0.0
        for j in range(n):
            if cost[j] < 0:
                if upper[j] == np.inf:
                    return UNBOUNDED, x, -np.inf
                x[j] = upper[j]
            obj += cost[j] * x[j]
        return OPTIMAL, x, obj
    ntot = n + m
    T = np.zeros((m, ntot))
    xB = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(n):
            s = max(s, abs(A[i, j]))
        if s == 0.0:
            s = 1.0
        sign = 1.0 if b[i] >= 0 else -1.0
        for j in range(n):
            T[i, j] = sign * A[i, j] / s
        T[i, n + i] = 1.0
        xB[i] = sign * b[i] / s
    up = np.empty(ntot)
    up[:n] = upper
    up[n:] = np.inf
    basis = np.empty(m, dtype=np.int64)
    status = np.zeros(ntot, dtype=np.int64)
    for i in range(m):
        basis[i] = n + i
        status[n + i] = 2
    d = np.zeros(ntot)
    for j in range(n):
        s = 0.0
        for i in range(m):
            s += T[i, j]
        d[j] = -s
    max_iter = 50 * (ntot + 10)
    st, bland = _iterate(T, xB, d, basis, status, up, ntot, max_iter, False)
    if st == ITERATION_LIMIT:
        return ITERATION_LIMIT, x, np.nan
    resid = 0.0
    for i in range(m):
        if basis[i] >= n:
            resid += max(xB[i], 0.0)
    if resid > FEAS_TOL:
        return INFEASIBLE, x, resid
    if not phase1_only:
        # drive artificials out of the basis; rows with no eligible pivot are redundant
        for r in range(m):
            if basis[r] < n:
                continue
            q = -1
            best = PIVOT_TOL
            for j in range(n):
                if status[j] != 2 and abs(T[r, j]) > best:
                    best = abs(T[r, j])
                    q = j
            if q < 0:
                continue
            value = 0.0 if status[q] == 0 else up[q]
            status[basis[r]] = 0
            piv = T[r, q]
            T[r, :] /= piv
            for i in range(m):
                if i != r:
                    f = T[i, q]
                    if f != 0.0:
                        T[i, :] -= f * T[r, :]
            basis[r] = q
            status[q] = 2
            xB[r] = value
        for j in range(n, ntot):
            up[j] = 0.0
        for j in range(ntot):
            d[j] = cost[j] if j < n else 0.0
        for i in range(m):
            cb = cost[basis[i]] if basis[i] < n else 0.0
            if cb != 0.0:
                d -= cb * T[i, :]
        st, bland = _iterate(T, xB, d, basis, status, up, n, max_iter, bland)
        if st == UNBOUNDED:
            return UNBOUNDED, x, -np.inf
        if st == ITERATION_LIMIT:
            return ITERATION_LIMIT, x, np.nan
    for j in range(n):
        if status[j] == 1:
            x[j] = up[j]
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = xB[i]
    obj = 0.0
    for j in range(n):
        obj += cost[j] * x[j]
    return OPTIMAL, x, obj


# -- fast paths for constrained zonotopes -----------------------------------

@njit(cache=True)
def _cz_contains_batch(M, offset, G, c, hw, Z, tol):
    """Membership of each column of ``Z`` in ``{G xi + c | A xi = b, |xi| <= 1}``.

    ``M = [G; A]`` and ``offset = [G 1 - c; b + A 1]``; the unknowns are
    ``xi + 1`` in ``[0, 2]``.
    """
    n = G.shape[0]
    ng = M.shape[1]
    N = Z.shape[1]
    out = np.zeros(N, dtype=np.bool_)
    upper = np.full(ng, 2.0)
    cost = np.zeros(ng)
    rhs = offset.copy()
    for k in range(N):
        inside = True
        for i in range(n):
            if abs(Z[i, k] - c[i]) > hw[i] + tol:
                inside = False
                break
        if not inside:
            continue
        for i in range(n):
            rhs[i] = offset[i] + Z[i, k]
        if ng == 0:
            ok = True
            for i in range(M.shape[0]):
                if abs(rhs[i]) > tol:
                    ok = False
            out[k] = ok
            continue
        st, _, _ = simplex_core(M, rhs, cost, upper, True)
        if st == ITERATION_LIMIT:
            raise RuntimeError("simplex iteration limit")
        out[k] = st == OPTIMAL
    return out


def cz_contains_points(G, c, A, b, Z, tol: float = FEAS_TOL) -> np.ndarray:
    """Vectorised constrained-zonotope membership; ``Z`` has shape ``(N, n)``."""
    G = np.asarray(G, float)
    Z = np.atleast_2d(np.asarray(Z, float))
    M = np.vstack([G, A]) if A.shape[0] else G
    offset = np.concatenate([G.sum(axis=1) - c, b + A.sum(axis=1)]) if A.shape[0] else G.sum(axis=1) - c
    hw = np.abs(G).sum(axis=1)
    try:
        return _cz_contains_batch(
            np.ascontiguousarray(M), offset, np.ascontiguousarray(G), np.asarray(c, float),
            hw, np.ascontiguousarray(Z.T), tol,
        )
    except RuntimeError as err:
        raise NumericalFailure(str(err)) from err


def cz_support(G, c, A, b, d) -> tuple[float, np.ndarray]:
    """Support value and maximising latent ``xi`` of a constrained zonotope in direction ``d``."""
    G = np.asarray(G, float)
    d = np.asarray(d, float)
    w = G.T @ d
    ng = G.shape[1]
    if ng == 0:
        return float(d @ c), np.zeros(0)
    if A.shape[0] == 0:
        xi = np.sign(w)
        return float(d @ c + np.abs(w).sum()), xi
    rhs = b + A.sum(axis=1)
    st, x, obj = simplex_core(np.ascontiguousarray(A), rhs, -w, np.full(ng, 2.0), False)
    if st == INFEASIBLE:
        raise InfeasibleProgram("constrained zonotope is empty")
    if st != OPTIMAL:
        raise NumericalFailure(f"simplex failed with status {st}")
    xi = x - 1.0
    return float(d @ c + w @ xi), xi


def cz_feasible_latent(A, b, ng: int):
    """A latent point ``xi`` in the unit box with ``A xi = b``, or ``None``."""
    if A.shape[0] == 0:
        return np.zeros(ng)
    rhs = b + A.sum(axis=1)
    st, x, _ = simplex_core(np.ascontiguousarray(A), rhs, np.zeros(ng), np.full(ng, 2.0), True)
    if st == ITERATION_LIMIT:
        raise NumericalFailure("simplex iteration limit")
    return x - 1.0 if st == OPTIMAL else None


# -- general interface ------------------------------------------------------

@dataclass
class LinearProgram:
    """``maximize objective.x`` subject to inequalities, equalities and variable bounds.

    Bounds default to the whole real line; ``lo``/``hi`` may hold infinities.
    """

    objective: np.ndarray
    ineqA: np.ndarray | None = None
    ineqB: np.ndarray | None = None
    eqA: np.ndarray | None = None
    eqB: np.ndarray | None = None
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.atleast_1d(np.asarray(self.objective, float))
        n = self.objective.size
        self.ineqA = np.zeros((0, n)) if self.ineqA is None else np.atleast_2d(np.asarray(self.ineqA, float)).reshape(-1, n)
        self.ineqB = np.zeros(0) if self.ineqB is None else np.atleast_1d(np.asarray(self.ineqB, float))
        self.eqA = np.zeros((0, n)) if self.eqA is None else np.atleast_2d(np.asarray(self.eqA, float)).reshape(-1, n)
        self.eqB = np.zeros(0) if self.eqB is None else np.atleast_1d(np.asarray(self.eqB, float))
        self.lo = np.full(n, -np.inf) if self.lo is None else np.broadcast_to(np.asarray(self.lo, float), (n,)).copy()
        self.hi = np.full(n, np.inf) if self.hi is None else np.broadcast_to(np.asarray(self.hi, float), (n,)).copy()
        if self.ineqA.shape[0] != self.ineqB.size or self.eqA.shape[0] != self.eqB.size:
            raise DimensionMismatch("constraint matrices and right-hand sides disagree")
        if np.any(self.lo > self.hi):
            raise DimensionMismatch("a variable has lo > hi")
        for arr in (self.objective, self.ineqA, self.ineqB, self.eqA, self.eqB):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")

    @property
    def n(self) -> int:
        return self.objective.size

    def residual(self, x) -> float:
        """Largest constraint violation at ``x``."""
        x = np.asarray(x, float)
        viol = [0.0]
        if self.ineqB.size:
            viol.append(float(np.max(self.ineqA @ x - self.ineqB)))
        if self.eqB.size:
            viol.append(float(np.max(np.abs(self.eqA @ x - self.eqB))))
        viol.append(float(np.max(self.lo - x, initial=0.0)))
        viol.append(float(np.max(x - self.hi, initial=0.0)))
        return max(viol)


@dataclass
class FeasibilityResult:
    feasible: bool
    witness: np.ndarray | None = field(default=None, repr=False)

    def __bool__(self):
        return self.feasible


def _standard_form(p: LinearProgram):
    n = p.n
    # column blocks: transformed originals (1 or 2 columns each), then slacks
    cols, shift, sign = [], np.zeros(n), np.ones(n)
    upper = []
    mapping = []  # (orig index, coefficient) for each standard column
    for j in range(n):
        lo, hi = p.lo[j], p.hi[j]
        if np.isfinite(lo):
            shift[j] = lo
            mapping.append((j, 1.0))
            upper.append(hi - lo)
        elif np.isfinite(hi):
            shift[j] = hi
            mapping.append((j, -1.0))
            upper.append(np.inf)
        else:
            mapping.append((j, 1.0))
            mapping.append((j, -1.0))
            upper.extend([np.inf, np.inf])
    nstd = len(mapping)
    ns = p.ineqB.size
    T = np.zeros((n, nstd))
    for k, (j, coef) in enumerate(mapping):
        T[j, k] = coef
    # x = shift + T y
    rows_A = []
    rows_b = []
    if ns:
        rows_A.append(np.hstack([p.ineqA @ T, np.eye(ns)]))
        rows_b.append(p.ineqB - p.ineqA @ shift)
    if p.eqB.size:
        rows_A.append(np.hstack([p.eqA @ T, np.zeros((p.eqB.size, ns))]))
        rows_b.append(p.eqB - p.eqA @ shift)
    A = np.vstack(rows_A) if rows_A else np.zeros((0, nstd + ns))
    b = np.concatenate(rows_b) if rows_b else np.zeros(0)
    cost = np.concatenate([-(p.objective @ T), np.zeros(ns)])
    up = np.concatenate([np.asarray(upper, float), np.full(ns, np.inf)])
    return A, b, cost, up, T, shift


def _solve(p: LinearProgram, phase1_only: bool):
    A, b, cost, up, T, shift = _standard_form(p)
    st, y, obj = simplex_core(np.ascontiguousarray(A), b, cost, up, phase1_only)
    if st == ITERATION_LIMIT:
        raise NumericalFailure("simplex iteration limit reached even with Bland's rule")
    x = shift + T @ y[: T.shape[1]]
    return st, x


def feasible(p: LinearProgram) -> FeasibilityResult:
    """Phase-1 feasibility check; the witness satisfies all constraints to ``FEAS_TOL``."""
    st, x = _solve(p, phase1_only=True)
    if st == INFEASIBLE:
        return FeasibilityResult(False)
    return FeasibilityResult(True, x)


def maximize(p: LinearProgram) -> tuple[float, np.ndarray]:
    st, x = _solve(p, phase1_only=False)
    if st == INFEASIBLE:
        raise InfeasibleProgram("linear program is infeasible")
    if st == UNBOUNDED:
        raise UnboundedProgram("objective is unbounded above")
    return float(p.objective @ x), x
