import numpy as np
import pytest
from hypothesis import given, strategies as st

from zonoest import expr as ex
from zonoest.exceptions import ExhaustiveTooLarge
from zonoest.expr import eval_point, jacobian_bounds_over_box, jacobian_exprs
from zonoest.interval import IntervalVector
from zonoest.mixmono import (
    DecompositionSelection, Sign, aligned_selection, bound_jacobian_via_decomposition, build_h_family,
    corner_point, decomposition_function, function_bounds, jss_remainder_bounds, parse_strategy,
    pipeline_family,
)
from zonoest.model import example1

from conftest import random_box, random_function


def scalar_family(lo, hi):
    return sorted(float(s.H[0, 0]) for s in build_h_family([[lo]], [[hi]]))


def grid(box, per_axis):
    axes = [np.linspace(l, h, per_axis) for l, h in zip(box.lo, box.hi)]
    return np.stack([a.ravel() for a in np.meshgrid(*axes, indexing="ij")])


# -- family ----------------------------------------------------------------

def test_family_scalar_examples():
    assert scalar_family(3, 3) == [0.0, 3.0]
    assert scalar_family(-2, 2) == [-2.0, 2.0]
    assert scalar_family(0, 1) == [0.0, 1.0]


def test_canonical_family_patterns():
    Jlo, Jhi = np.array([[-1.0, 2.0]]), np.array([[1.0, 3.0]])
    lo, hi = build_h_family(Jlo, Jhi)
    assert lo.H.tolist() == [[-1.0, 0.0]] and not lo.nonpos.any()
    assert hi.H.tolist() == [[1.0, 3.0]] and hi.nonpos.all()
    assert lo.sign_pattern == [[Sign.NON_NEGATIVE, Sign.NON_NEGATIVE]]


def test_family_strategies():
    Jlo, Jhi = -np.ones((2, 2)), np.ones((2, 2))
    assert len(build_h_family(Jlo, Jhi, "canonical+3", seed=1)) == 5
    assert len(build_h_family(Jlo, Jhi, "exhaustive")) == 16
    with pytest.raises(ExhaustiveTooLarge):
        build_h_family(-np.ones((4, 5)), np.ones((4, 5)), "exhaustive")
    with pytest.raises(ValueError):
        parse_strategy("greedy")
    with pytest.raises(ValueError):
        build_h_family([[1.0]], [[0.0]])
    a = build_h_family(Jlo, Jhi, "canonical+4", seed=3)
    b = build_h_family(Jlo, Jhi, "canonical+4", seed=3)
    assert all(np.array_equal(x.H, y.H) for x, y in zip(a, b))


@given(st.integers(0, 10_000))
def test_family_membership(seed):
    rng = np.random.default_rng(seed)
    Jlo = rng.normal(size=(2, 3))
    Jhi = Jlo + rng.uniform(0, 2, (2, 3))
    for sel in pipeline_family(Jlo, Jhi, "canonical+3", seed):
        lo_choice, hi_choice = np.minimum(Jlo, 0), np.maximum(Jhi, 0)
        assert np.array_equal(np.where(sel.nonpos, hi_choice, lo_choice), sel.H)


def test_aligned_selection_reproduces_point_jacobian():
    J = np.array([[2.0, -3.0], [0.0, 0.5]])
    assert np.array_equal(aligned_selection(J, J).H, J)


# -- corners ---------------------------------------------------------------

def test_corner_point_examples():
    ub, lb = np.ones(2), -np.ones(2)
    nonneg = DecompositionSelection(np.zeros((1, 2)), [[False, False]])
    nonpos = DecompositionSelection(np.zeros((1, 2)), [[True, True]])
    mixed = DecompositionSelection(np.zeros((1, 2)), [[False, True]])
    assert corner_point(nonneg, 0, ub, lb).tolist() == [1, 1]
    assert corner_point(nonpos, 0, ub, lb).tolist() == [-1, -1]
    assert corner_point(mixed, 0, ub, lb).tolist() == [1, -1]


# -- remainder bounds ------------------------------------------------------

def test_remainder_bound_examples():
    x = ex.variables(1)[0]
    unit = IntervalVector([-1.0], [1.0])
    sel = DecompositionSelection([[2.0]], [[True]])
    lo, hi = jss_remainder_bounds([x * x], sel, unit)
    assert (lo[0], hi[0]) == (-1.0, 3.0)
    xi = np.linspace(-1, 1, 10_000)
    g = xi ** 2 - 2 * xi
    assert (g.min(), g.max()) == pytest.approx((-1.0, 3.0), abs=1e-12)

    lo, hi = jss_remainder_bounds([3 * x], DecompositionSelection([[3.0]], [[True]]), unit)
    assert (lo[0], hi[0]) == (0.0, 0.0)

    lo, hi = jss_remainder_bounds([x ** 3], DecompositionSelection([[0.0]], [[False]]), IntervalVector([0.0], [2.0]))
    assert (lo[0], hi[0]) == (0.0, 8.0)


def test_remainder_bounds_accept_callables():
    sel = DecompositionSelection([[2.0]], [[True]])
    lo, hi = jss_remainder_bounds(lambda P: P ** 2, sel, ([-1.0], [1.0]))
    assert (lo[0], hi[0]) == (-1.0, 3.0)


@given(st.integers(0, 10_000))
def test_remainder_soundness_and_tightness(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 2, 2)
    box = random_box(rng)
    J = jacobian_bounds_over_box(jacobian_exprs(f, 2), box)
    P = box.lo[:, None] + rng.random((2, 2000)) * box.diam[:, None]
    for sel in build_h_family(J.lo, J.hi, "canonical+2", seed):
        lo, hi = jss_remainder_bounds(f, sel, box)
        g = eval_point(f, P) - sel.H @ P
        assert np.all(g >= lo[:, None] - 1e-9) and np.all(g <= hi[:, None] + 1e-9)
        for i in range(2):
            top = corner_point(sel, i, box.hi, box.lo)
            bot = corner_point(sel, i, box.lo, box.hi)
            ulps = 8 * np.finfo(float).eps * (1 + abs(hi[i]) + abs(lo[i]) + np.abs(sel.H[i]).sum() * 3)
            assert abs(eval_point(f, top)[i] - sel.H[i] @ top - hi[i]) <= ulps
            assert abs(eval_point(f, bot)[i] - sel.H[i] @ bot - lo[i]) <= ulps


@given(st.integers(0, 10_000))
def test_decomposition_function_axioms(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 2, 2)
    box = random_box(rng)
    J = jacobian_bounds_over_box(jacobian_exprs(f, 2), box)
    for sel in build_h_family(J.lo, J.hi):
        for _ in range(10):
            a = box.lo + rng.random(2) * box.diam
            b = box.lo + rng.random(2) * box.diam
            lo, hi = np.minimum(a, b), np.maximum(a, b)
            np.testing.assert_allclose(decomposition_function(f, sel, a, a), eval_point(f, a), atol=1e-10)
            assert np.all(decomposition_function(f, sel, lo, a) <= decomposition_function(f, sel, hi, a) + 1e-9)
            assert np.all(decomposition_function(f, sel, a, lo) >= decomposition_function(f, sel, a, hi) - 1e-9)


@given(st.integers(0, 10_000))
def test_function_bounds_enclose_range(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 2, 2)
    box = random_box(rng)
    J = jacobian_bounds_over_box(jacobian_exprs(f, 2), box)
    B = function_bounds(f, J.lo, J.hi, box, "canonical+2", seed)
    vals = eval_point(f, grid(box, 60))
    assert np.all(vals >= B.lo[:, None]) and np.all(vals <= B.hi[:, None])


# -- Jacobian refinement ---------------------------------------------------

def test_linear_entries_are_kept():
    x = ex.variables(2)
    jac = jacobian_exprs([2 * x[0] - x[1]], 2)
    hess = [jacobian_exprs(row, 2) for row in jac]
    box = IntervalVector([-1.0, -1.0], [1.0, 1.0])
    R = bound_jacobian_via_decomposition(jac, hess, box)
    assert R.lo.tolist() == [[2.0, -1.0]] and R.hi.tolist() == [[2.0, -1.0]]


def test_entry_two_xi_is_tight():
    x = ex.variables(1)[0]
    jac = [[2 * x]]
    hess = [[[ex.Const(2.0)]]]
    R = bound_jacobian_via_decomposition(jac, hess, IntervalVector([-1.0], [1.0]))
    assert R.lo[0, 0] == pytest.approx(-2.0) and R.hi[0, 0] == pytest.approx(2.0)


def test_example1_refinement_encloses_samples():
    m = example1()
    box = IntervalVector([0.1, 0.3, -0.1, -0.1], [0.9, 0.7, 0.1, 0.1])
    plain = m.jac_f_bounds(box)
    ref = bound_jacobian_via_decomposition(m.jac_f, m.hess_f, box)
    assert np.all(ref.lo >= plain.lo) and np.all(ref.hi <= plain.hi)
    assert np.any(ref.diam < plain.diam)
    rng = np.random.default_rng(0)
    P = box.lo[:, None] + rng.random((4, 10_000)) * box.diam[:, None]
    d11 = eval_point([m.jac_f[0][0]], P)[0]
    assert d11.min() >= ref.lo[0, 0] and d11.max() <= ref.hi[0, 0]


@given(st.integers(0, 10_000))
def test_refinement_is_sound_and_never_wider(seed):
    rng = np.random.default_rng(seed)
    f = random_function(rng, 2, 2)
    jac = jacobian_exprs(f, 2)
    hess = [jacobian_exprs(row, 2) for row in jac]
    box = random_box(rng)
    plain = jacobian_bounds_over_box(jac, box)
    ref = bound_jacobian_via_decomposition(jac, hess, box)
    assert np.all(ref.lo >= plain.lo) and np.all(ref.hi <= plain.hi)
    P = box.lo[:, None] + rng.random((2, 2000)) * box.diam[:, None]
    for i in range(2):
        vals = eval_point(jac[i], P)
        assert np.all(vals >= ref.lo[i][:, None]) and np.all(vals <= ref.hi[i][:, None])
