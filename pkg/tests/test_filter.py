import numpy as np
import pytest
from hypothesis import given, strategies as st

from zonoest import expr as ex
from zonoest.exceptions import DimensionMismatch, HNotInX, X0NotInPrior
from zonoest.filter import (
    ALL_METHODS, EstimatorConfig, MethodId, StepRecord, combined_propagate, cz_bound_product, dcz_propagate,
    dcz_update, dzb_propagate, dzb_update, estimator_step, measurement_set, rrsr_propagate, rrsr_update,
    run_estimators,
)
from zonoest.interval import IntervalMatrix
from zonoest.model import SystemModel, get_model
from zonoest.scenario import consistent_samples, load_scenario, sample_uniform, simulate_truth
from zonoest.sets import (
    ConstrainedZonotope, SetEnclosure, Zonotope, cartesian_product, generalized_linear_intersection, interval_hull,
    linear_map, minkowski_sum,
)

from conftest import box, unit_interval


def scalar_model(f, mu=None):
    """One state, one disturbance: ``f`` and ``mu`` are callables of (x, w) / x."""
    x, w = ex.variables(2)
    return SystemModel(1, 1, [f(x, w)], [mu(x) if mu else x])


POINT1 = Zonotope(np.zeros((1, 0)), [0.0])
SCAN = np.round(np.arange(0.0, 3.0001, 0.1), 10)[:, None]


def hull_samples(S, n, rng, pad=0.0):
    h = interval_hull(S)
    return h.lo - pad + rng.random((n, h.lo.size)) * (h.diam + 2 * pad)


def successors(model, X, W, n, rng):
    x = sample_uniform(X, n, rng)
    w = sample_uniform(W, n, rng)
    return model.step(x.T, w.T).T


# -- bound product ----------------------------------------------------------

def test_bound_product_zero_width_is_exact(X0):
    M = np.array([[1.0, 2.0], [0.5, -1.0]])
    Z = cz_bound_product(IntervalMatrix(M, M), X0)
    np.testing.assert_array_equal(Z.G, M @ X0.G)
    np.testing.assert_array_equal(Z.c, M @ X0.c)


def test_bound_product_scalar_example():
    Z = cz_bound_product(IntervalMatrix([[1.0]], [[2.0]]), unit_interval())
    assert Z.support([1.0]) == pytest.approx(2.0) and Z.support([-1.0]) == pytest.approx(2.0)


def test_bound_product_dimension_check(X0):
    with pytest.raises(DimensionMismatch):
        cz_bound_product(IntervalMatrix(np.zeros((2, 3)), np.ones((2, 3))), X0)


@given(st.integers(0, 10_000))
def test_bound_product_contains_sampled_products(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    ng = n + 2
    G = rng.normal(size=(n, ng))
    A = rng.normal(size=(1, ng))
    X = ConstrainedZonotope(G, rng.normal(size=n), A, A @ rng.uniform(-0.5, 0.5, ng))
    lo = rng.normal(size=(2, n))
    J = IntervalMatrix(lo, lo + rng.uniform(0, 1, (2, n)))
    Z = cz_bound_product(J, X)
    xs = sample_uniform(X, 200, rng)
    Js = J.lo[None] + rng.random((200, 2, n)) * J.diam[None]
    assert Z.contains_points(np.einsum("kij,kj->ki", Js, xs)).all()


# -- propagation ------------------------------------------------------------

def test_rrsr_square_example():
    m = scalar_model(lambda x, w: x * x + w)
    Z = rrsr_propagate(m, unit_interval(), POINT1, h=[0.0])
    assert Z.support([1.0]) == pytest.approx(2.0, abs=1e-9)
    assert Z.support([-1.0]) == pytest.approx(2.0, abs=1e-9)


def test_rrsr_linear_is_exact(X0):
    A = np.array([[0.9, 0.2], [-0.1, 0.8]])
    m = get_model("linear", {"A": A, "C": np.eye(2)})
    none = Zonotope(np.zeros((2, 0)), np.zeros(2))
    Z = rrsr_propagate(m, X0, none)
    ref = linear_map(A, X0)
    pts = hull_samples(ref, 2000, np.random.default_rng(0), 0.05)
    assert np.array_equal(Z.contains_points(pts, 1e-9), ref.contains_points(pts, 1e-9))


def test_rrsr_rejects_expansion_point_outside(X0, W1, ex1):
    with pytest.raises(HNotInX):
        rrsr_propagate(ex1, X0, W1, h=[2.0, 2.0])


def test_dzb_square_member():
    m = scalar_model(lambda x, w: x * x + w)
    out = dzb_propagate(m, [cartesian_product(unit_interval(), POINT1)])
    found = [M for M in out.members if M.G[0, 0] == 2.0]
    assert found
    np.testing.assert_allclose(found[0].G, [[2.0, 2.0]])
    np.testing.assert_allclose(found[0].c, [1.0])
    assert out.contains_points(np.linspace(0, 1, 11)[:, None]).all()


def test_dzb_linear_members_are_exact(X0):
    A = np.array([[0.9, 0.2], [-0.1, 0.8]])
    m = get_model("linear", {"A": A, "C": np.eye(2)})
    Z = cartesian_product(X0, Zonotope(np.zeros((2, 0)), np.zeros(2)))
    out = dzb_propagate(m, [Z])
    ref = linear_map(A, X0)
    pts = hull_samples(ref, 1000, np.random.default_rng(1), 0.05)
    want = ref.contains_points(pts, 1e-9)
    exact = [M for M in out.members if np.array_equal(M.contains_points(pts, 1e-9), want)]
    assert exact, "the aligned member reproduces the linear image"
    inner = sample_uniform(ref, 500, np.random.default_rng(2))
    for M in out.members:
        assert M.contains_points(inner).all()


def test_dcz_pinned_latent_is_tighter():
    x, y, w = ex.variables(3)
    m = SystemModel(2, 1, [x * x + w, y + w], [x])
    free = Zonotope(np.eye(3), np.zeros(3))
    pinned = ConstrainedZonotope(np.eye(3), np.zeros(3), [[1.0, 0.0, 0.0]], [0.5])
    hf = interval_hull(dcz_propagate(m, free))
    hp = interval_hull(dcz_propagate(m, pinned))
    assert hp.diam[0] < hf.diam[0]
    assert hp.lo[0] <= 0.25 - 1 + 1e-9 and hp.hi[0] >= 0.25 + 1 - 1e-9


def test_dcz_unconstrained_refines_dzb():
    m = scalar_model(lambda x, w: x * x * x - x + 0.5 * w)
    Z = cartesian_product(box([-1], [0.5]), box([-0.2], [0.2]))
    a, b = dcz_propagate(m, Z), dzb_propagate(m, [Z])
    rng = np.random.default_rng(2)
    pts = hull_samples(b, 2000, rng, 0.1)
    ina = a.contains_points(pts, 1e-9)
    assert b.contains_points(pts[ina], 1e-9).all()
    img = successors(m, box([-1], [0.5]), box([-0.2], [0.2]), 2000, rng)
    assert a.contains_points(img).all() and b.contains_points(img).all()


def test_propagations_contain_example1_successors(ex1, X0, W1):
    rng = np.random.default_rng(3)
    succ = successors(ex1, X0, W1, 10_000, rng)
    Z = cartesian_product(X0, W1)
    for out in (rrsr_propagate(ex1, X0, W1), rrsr_propagate(ex1, X0, W1, jac_source="decomposition"),
                dzb_propagate(ex1, [Z]), dcz_propagate(ex1, Z)):
        assert out.contains_points(succ).all()


def test_combined_propagation(ex1, X0, W1):
    Z = cartesian_product(X0, W1)
    a, b = dzb_propagate(ex1, [Z]), dcz_propagate(ex1, Z)
    c = combined_propagate(ex1, [Z], Z)
    assert len(c) == len(a) + len(b)
    rng = np.random.default_rng(4)
    pts = hull_samples(c, 3000, rng, 0.05)
    inc = c.contains_points(pts)
    assert not np.any(inc & ~(a.contains_points(pts) & b.contains_points(pts)))
    assert c.contains_points(successors(ex1, X0, W1, 5000, rng)).all()


def test_decomposition_jacobian_not_wider_than_interval(ex1):
    from zonoest.interval import IntervalVector
    from zonoest.mixmono import bound_jacobian_via_decomposition
    box_z = IntervalVector([0.1, 0.3, -0.1, -0.1], [0.9, 0.7, 0.1, 0.1])
    plain = ex1.jac_f_bounds(box_z)
    ref = bound_jacobian_via_decomposition(ex1.jac_f, ex1.hess_f, box_z)
    assert plain.contains(ref.lo) and plain.contains(ref.hi)


# -- update -----------------------------------------------------------------

@pytest.fixture
def ident():
    return scalar_model(lambda x, w: x + w)


def test_updates_accept_exactly_the_overlap(ident):
    prior, Y = box([0], [2]), box([1], [3])
    expect = (SCAN[:, 0] >= 1) & (SCAN[:, 0] <= 2)
    for out in (dzb_update(ident, [prior], Y), dcz_update(ident, prior, Y), rrsr_update(ident, prior, Y)):
        assert np.array_equal(out.contains_points(SCAN), expect)


def test_updates_with_uninformative_measurement(ex1, X0):
    rng = np.random.default_rng(5)
    Y = box([-10, -10], [10, 10])
    pts = hull_samples(X0, 2000, rng, 0.05)
    ref = X0.contains_points(pts)
    for out in (dzb_update(ex1, [X0], Y), dcz_update(ex1, X0, Y), rrsr_update(ex1, X0, Y)):
        assert np.array_equal(out.contains_points(pts), ref)


def test_linear_updates_match_generalized_intersection(X0):
    C = np.array([[1.0, 0.5], [-0.3, 1.0]])
    m = get_model("linear", {"A": np.eye(2), "C": C})
    Y = Zonotope([[0.1, 0.05], [0.0, 0.08]], C @ [0.55, 0.5])
    ref = generalized_linear_intersection(X0, C, Y)
    pts = hull_samples(X0, 1000, np.random.default_rng(6))
    want = ref.contains_points(pts, 1e-6)
    assert want.any() and not want.all()
    for out in (dzb_update(m, [X0], Y), dcz_update(m, X0, Y), rrsr_update(m, X0, Y)):
        assert np.array_equal(out.contains_points(pts, 1e-6), want)


def test_rrsr_update_rejects_outside_point(ident):
    with pytest.raises(X0NotInPrior):
        rrsr_update(ident, box([0], [2]), box([1], [3]), x0=[5.0])


def test_measurement_set_reflects_noise():
    V = box([-0.1, -0.3], [0.2, 0.3])
    Y = measurement_set([1.0, 2.0], V)
    assert Y.contains([0.8, 2.3]) and not Y.contains([1.15, 2.0])


def test_unicycle_step_one_updates_contain_consistent_states(uni):
    sc = load_scenario("unicycle").with_overrides(steps=2)
    states, ys = simulate_truth(uni, sc, 11)
    samples = consistent_samples(uni, sc, ys, 2000, 12, truth=states)[1]
    Y = measurement_set(ys[0], sc.V)
    X = SetEnclosure([sc.X0])
    for method in ALL_METHODS[:-1]:
        rec = estimator_step(method, X, sc.W, Y, uni, 1)
        assert rec.status == "ok"
        assert rec.updated.contains_points(samples).all(), method


# -- recursive loop ---------------------------------------------------------

def test_identity_dynamics_with_uninformative_measurement(X0):
    x1, x2, w1, w2 = ex.variables(4)
    m = SystemModel(2, 2, [x1 + w1, x2 + w2], [x1, x2])
    none = Zonotope(np.zeros((2, 0)), np.zeros(2))
    Y = box([-50, -50], [50, 50])
    pts = hull_samples(X0, 1500, np.random.default_rng(7), 0.05)
    ref = X0.contains_points(pts)
    for method in ALL_METHODS:
        rec = estimator_step(method, SetEnclosure([X0]), none, Y, m)
        assert np.array_equal(rec.updated.contains_points(pts), ref), method
        assert np.array_equal(rec.propagated.contains_points(pts), ref), method


def test_inconsistent_measurement_is_flagged(ident):
    rec = estimator_step("D-CZ", SetEnclosure([box([0], [2])]), POINT1, box([5], [6]), ident)
    assert rec.status == "empty_update"


@pytest.fixture(scope="module")
def example1_run():
    sc = load_scenario("example1").with_overrides(steps=4)
    m = sc.model()
    states, ys = simulate_truth(m, sc)
    return m, sc, states, ys, run_estimators(m, sc.X0, sc.W, sc.V, ys, sc.methods, EstimatorConfig())


def test_run_records_every_method_and_step(example1_run):
    _, sc, _, _, recs = example1_run
    assert [(r.k, r.method) for r in recs] == [(k, m) for k in range(4) for m in ALL_METHODS]
    assert all(isinstance(r, StepRecord) and r.status == "ok" for r in recs)
    assert all(r.wall_time >= 0 for r in recs)


def test_run_contains_true_states(example1_run):
    _, _, states, _, recs = example1_run
    for r in recs:
        assert r.updated.contains(states[r.k]), (r.k, r.method)


def test_update_refines_propagation(example1_run):
    rng = np.random.default_rng(8)
    _, _, _, _, recs = example1_run
    for r in recs:
        if r.k == 0:
            continue
        pts = hull_samples(r.updated, 1500, rng, 0.02)
        inside = r.updated.contains_points(pts)
        assert r.propagated.contains_points(pts[inside], 1e-7).all(), (r.k, r.method)


def test_comb_implies_every_method(example1_run):
    rng = np.random.default_rng(9)
    _, _, _, _, recs = example1_run
    for k in range(1, 4):
        by = {r.method: r.updated for r in recs if r.k == k}
        pts = hull_samples(by[MethodId.RRSR], 3000, rng)
        comb = by[MethodId.COMB].contains_points(pts)
        assert comb.any()
        for m in ALL_METHODS[:-1]:
            assert by[m].contains_points(pts[comb], 1e-7).all(), (k, m)


def test_failed_chain_is_skipped(ex1, X0, W1, V1):
    big = Zonotope(np.diag([6.0, 6.0]), [-4.0, 0.0])
    recs = run_estimators(ex1, big, W1, V1, [np.zeros(2)] * 2, ["RRSR"])
    statuses = [r.status for r in recs]
    assert statuses[1].startswith("failed:") and statuses[2] == "skipped"


def test_method_parse():
    assert MethodId.parse("d_cz") is MethodId.D_CZ
    with pytest.raises(ValueError):
        MethodId.parse("EKF")
