import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from stampc.sets import (
    DegenerateStripWarning,
    EmptySetError,
    IntervalBox,
    IntervalMatrix,
    Strip,
    ZonoIntersection,
    Zonotope,
    centered_inclusion,
    contains_point,
    contains_points,
    diameter,
    interval_hull,
    intersect_strip,
    linear_map,
    minkowski_sum,
    polytope_to_zonotopes,
    polytope_vertices,
    reduce_order,
    strip_box_hull,
    zonotope_inclusion,
)


def rand_zono(rng, n=2, m=3):
    return Zonotope(rng.normal(size=n), rng.normal(size=(n, m)))


def brute_support(z, d, rng, k=20000):
    # vertices of a zonotope are images of sign vectors; small m so enumerate
    m = z.order
    signs = np.array(np.meshgrid(*[[-1, 1]] * m)).reshape(m, -1).T
    pts = z.center + signs @ z.generators.T
    return float(np.max(pts @ d))


# --- minkowski sum / linear map --------------------------------------------------

def test_minkowski_1d():
    z = minkowski_sum(Zonotope([0.0], [[1.0]]), Zonotope([1.0], [[2.0]]))
    assert z.center.tolist() == [1.0]
    assert z.generators.tolist() == [[1.0, 2.0]]
    h = interval_hull(z)
    assert (h.lower[0], h.upper[0]) == (-2.0, 4.0)


def test_minkowski_with_singleton_is_identity():
    rng = np.random.default_rng(1)
    z = rand_zono(rng)
    out = minkowski_sum(z, Zonotope.singleton([0.0, 0.0]))
    np.testing.assert_array_equal(out.center, z.center)
    np.testing.assert_array_equal(out.generators, z.generators)


def test_minkowski_dimension_mismatch():
    with pytest.raises(ValueError):
        minkowski_sum(Zonotope([0.0], [[1.0]]), Zonotope([0.0, 0.0], np.eye(2)))


def test_minkowski_sampling_and_support():
    rng = np.random.default_rng(2)
    a, b = rand_zono(rng), rand_zono(rng, m=2)
    s = minkowski_sum(a, b)
    pts = a.sample(10000, rng) + b.sample(10000, rng)
    assert contains_points(s, pts).all()
    for d in rng.normal(size=(16, 2)):
        assert abs(s.support(d) - a.support(d) - b.support(d)) <= 1e-9
        assert abs(s.support(d) - brute_support(s, d, rng)) <= 1e-9


def test_linear_map_identity_and_zero():
    rng = np.random.default_rng(3)
    z = rand_zono(rng)
    same = linear_map(np.eye(2), z)
    np.testing.assert_allclose(same.center, z.center)
    np.testing.assert_allclose(same.generators, z.generators)
    zero = linear_map(np.zeros((2, 2)), z)
    assert zero.order == 0
    np.testing.assert_array_equal(zero.center, [0.0, 0.0])


def test_linear_map_sampling_and_support():
    rng = np.random.default_rng(4)
    z = rand_zono(rng)
    A = rng.normal(size=(2, 2))
    out = linear_map(A, z)
    assert contains_points(out, z.sample(10000, rng) @ A.T).all()
    for d in rng.normal(size=(16, 2)):
        assert abs(out.support(d) - z.support(A.T @ d)) <= 1e-9


def test_linear_map_dimension_mismatch():
    with pytest.raises(ValueError):
        linear_map(np.eye(3), Zonotope([0.0, 0.0], np.eye(2)))


# --- interval hull ------------------------------------------------------------------

def test_interval_hull_example():
    h = interval_hull(Zonotope([0.0, 0.0], [[1.0, 0.5], [0.0, 0.5]]))
    np.testing.assert_allclose(h.lower, [-1.5, -0.5])
    np.testing.assert_allclose(h.upper, [1.5, 0.5])


def test_interval_hull_singleton_and_idempotent():
    h = interval_hull(Zonotope.singleton([1.0, 2.0]))
    np.testing.assert_array_equal(h.lower, h.upper)
    box = IntervalBox([-1.0, 0.0], [2.0, 3.0])
    again = interval_hull(box.to_zonotope())
    np.testing.assert_allclose(again.lower, box.lower)
    np.testing.assert_allclose(again.upper, box.upper)


def test_interval_hull_minimal():
    rng = np.random.default_rng(5)
    z = rand_zono(rng)
    h = interval_hull(z)
    # the hull faces are touched by zonotope vertices
    for i in range(2):
        e = np.eye(2)[i]
        assert abs(z.support(e) - h.upper[i]) < 1e-12
        assert abs(-z.support(-e) - h.lower[i]) < 1e-12
        s_hi = np.sign(z.generators[i])
        x_hi = z.center + z.generators @ s_hi
        assert x_hi[i] > h.upper[i] - 1e-6


def test_interval_box_invalid():
    with pytest.raises(ValueError):
        IntervalBox([1.0], [0.0])


# --- interval matrix / inclusion -----------------------------------------------------

def test_zonotope_inclusion_zero_radius():
    M = IntervalMatrix.point([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(zonotope_inclusion(M), [[1.0, 2.0], [3.0, 4.0]])


def test_zonotope_inclusion_scalar():
    G = zonotope_inclusion(IntervalMatrix([[0.0]], [[1.0]]))
    h = interval_hull(Zonotope([0.0], G))
    assert (h.lower[0], h.upper[0]) == (-1.0, 1.0)


def test_zonotope_inclusion_negative_radius():
    with pytest.raises(ValueError):
        IntervalMatrix([[0.0]], [[-1.0]])


def test_zonotope_inclusion_sampling():
    rng = np.random.default_rng(6)
    M = IntervalMatrix(rng.normal(size=(2, 2)), rng.uniform(0, 0.5, size=(2, 2)))
    z = Zonotope(np.zeros(2), zonotope_inclusion(M))
    Ms = M.midpoint + M.radius * rng.uniform(-1, 1, size=(10000, 2, 2))
    s = rng.uniform(-1, 1, size=(10000, 2))
    pts = np.einsum("kij,kj->ki", Ms, s)
    assert contains_points(z, pts).all()


def _rate_point(p, M):
    return Zonotope(p + M.center, M.generators)


def test_centered_inclusion_affine_exact():
    z = Zonotope([0.0], [[0.1]])
    M = Zonotope([0.0], [[0.008]])
    out = centered_inclusion(_rate_point, lambda box, m: IntervalMatrix.point([[1.0]]), z, M)
    h = interval_hull(out)
    assert h.lower[0] == pytest.approx(-0.108, abs=1e-12)
    assert h.upper[0] == pytest.approx(0.108, abs=1e-12)


def test_centered_inclusion_identity():
    z = Zonotope([0.2], [[0.1]])
    out = centered_inclusion(lambda p, M: Zonotope.singleton(p), lambda b, m: IntervalMatrix.point([[1.0]]),
                             z, Zonotope([0.0], [[0.5]]))
    h = interval_hull(out)
    assert (h.lower[0], h.upper[0]) == pytest.approx((0.1, 0.3))


def test_centered_inclusion_nonlinear_sampling():
    # eta(v, delta) = v + v^2 delta on v in [0, 1], delta in [-0.1, 0.1]
    z = Zonotope([0.5], [[0.5]])
    M = Zonotope([0.0], [[0.1]])

    def point(p, m):
        return Zonotope(p + p ** 2 * m.center, (p[0] ** 2) * m.generators)

    def jac(box, m):
        mh = interval_hull(m)
        # d/dv = 1 + 2 v delta, with v in box and delta in mh
        cands = [1 + 2 * a * b for a in (box.lower[0], box.upper[0]) for b in (mh.lower[0], mh.upper[0])]
        return IntervalMatrix.from_bounds([[min(cands)]], [[max(cands)]])

    out = centered_inclusion(point, jac, z, M)
    rng = np.random.default_rng(7)
    v = rng.uniform(0, 1, 100000)
    d = rng.uniform(-0.1, 0.1, 100000)
    assert contains_points(out, (v + v ** 2 * d)[:, None]).all()


# --- strips ----------------------------------------------------------------------------

def test_strip_covering_returns_z():
    z = Zonotope([0.0], [[1.0]])
    s = Strip([[1.0]], [0.0], IntervalBox([-5.0], [5.0]))
    out = intersect_strip(z, s)
    np.testing.assert_array_equal(out.center, z.center)
    np.testing.assert_array_equal(out.generators, z.generators)


def test_strip_1d_sandwich():
    z = Zonotope([0.0], [[1.0]])
    s = Strip([[1.0]], [0.5], IntervalBox([-0.1], [0.1]))
    h = interval_hull(intersect_strip(z, s))
    assert h.lower[0] >= 0.35 - 1e-12 and h.upper[0] <= 0.65 + 1e-12
    assert h.lower[0] <= 0.4 + 1e-12 and h.upper[0] >= 0.6 - 1e-12


def test_strip_degenerate_warns():
    z = Zonotope([0.0, 0.0], [[1.0], [0.0]])
    s = Strip([[0.0, 1.0]], [5.0], IntervalBox([-0.1], [0.1]))
    with pytest.warns(DegenerateStripWarning):
        out = intersect_strip(z, s)
    assert out is z


@pytest.mark.parametrize("seed", range(10))
def test_strip_random_2d_sound(seed):
    rng = np.random.default_rng(seed)
    z = rand_zono(rng, m=4)
    phi = rng.normal(size=(1, 2))
    y = phi @ z.center + rng.uniform(-0.5, 0.5, 1)
    s = Strip(phi, y, IntervalBox([-0.3], [0.3]))
    out = intersect_strip(z, s)
    pts = z.sample(20000, rng)
    pts = pts[s.contains_points(pts)]
    assert contains_points(out, pts).all()
    # hull never grows by more than the strip radii mapped through the gain
    assert interval_hull(out).diameter() <= interval_hull(z).diameter() + 0.6 * np.abs(phi).sum() * 10


def test_strip_box_hull_exact_1d():
    s = Strip([[1.0]], [0.5], IntervalBox([-0.1], [0.1]))
    h = strip_box_hull(s, IntervalBox([-1.0], [1.0]))
    assert (h.lower[0], h.upper[0]) == pytest.approx((0.4, 0.6))
    assert strip_box_hull(Strip([[1.0]], [5.0], IntervalBox([-0.1], [0.1])),
                          IntervalBox([-1.0], [1.0])) is None


# --- membership / diameter ---------------------------------------------------------------

def test_contains_center_and_outside_hull():
    rng = np.random.default_rng(8)
    z = rand_zono(rng, m=5)
    assert contains_point(z, z.center)
    h = interval_hull(z)
    assert not contains_point(z, h.upper + 0.01)


def test_contains_sampled_images():
    rng = np.random.default_rng(9)
    for m in (1, 2, 3, 6, 12):
        z = rand_zono(rng, n=3, m=m)
        assert contains_points(z, z.sample(10000, rng)).all()


def test_contains_rejects_points_outside():
    rng = np.random.default_rng(10)
    z = rand_zono(rng, m=4)
    d = rng.normal(size=(200, 2))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    outside = z.center + d * (np.array([z.support(v) - v @ z.center for v in d])[:, None] + 1e-3)
    # each point lies beyond the supporting hyperplane in its direction
    assert not contains_points(z, outside).any()


def test_contains_intersection_is_conjunction():
    a = Zonotope.from_box([-1.0, -1.0], [1.0, 1.0])
    b = Zonotope.from_box([0.0, 0.0], [2.0, 2.0])
    zi = ZonoIntersection([a, b])
    assert contains_point(zi, [0.5, 0.5])
    assert not contains_point(zi, [-0.5, 0.5])


def test_contains_dimension_mismatch():
    with pytest.raises(ValueError):
        contains_point(Zonotope([0.0], [[1.0]]), [0.0, 0.0])


def test_diameter_examples():
    assert diameter(ZonoIntersection([Zonotope([0.0], [[0.15]])])) == pytest.approx(0.3)
    assert diameter(ZonoIntersection([Zonotope.singleton([1.0, 2.0])])) == 0.0
    a = Zonotope.from_box([-1.0, -1.0], [1.0, 1.0])
    b = Zonotope.from_box([0.0, -2.0], [2.0, 0.5])
    assert diameter(ZonoIntersection([a, b])) == pytest.approx(np.hypot(1.0, 1.5))


def test_diameter_empty_raises():
    a = Zonotope.from_box([0.0], [1.0])
    b = Zonotope.from_box([2.0], [3.0])
    with pytest.raises(EmptySetError):
        diameter(ZonoIntersection([a, b]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_diameter_monotone_in_members(seed, k):
    rng = np.random.default_rng(seed)
    base = [Zonotope.from_box([-1.0, -1.0], [1.0, 1.0])]
    extra = [Zonotope(rng.uniform(-0.5, 0.5, 2), rng.normal(size=(2, 2))) for _ in range(k)]
    big = ZonoIntersection(base)
    small = ZonoIntersection(base + extra)
    try:
        assert diameter(small) <= diameter(big) + 1e-9
    except EmptySetError:
        pass


# --- reduction ---------------------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_reduce_order_sound(seed):
    rng = np.random.default_rng(seed)
    z = rand_zono(rng, n=2, m=40)
    r = reduce_order(z, 8)
    assert r.order <= 8
    assert contains_points(r, z.sample(2000, rng)).all()


def test_zero_columns_pruned():
    z = Zonotope([0.0, 0.0], [[1.0, 0.0], [0.0, 0.0]])
    assert z.order == 1


# --- polytope decomposition ------------------------------------------------------------------

def box_halfspaces(lo, hi):
    n = len(lo)
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.concatenate([hi, -np.asarray(lo)])
    return A, b


def test_polytope_box_single_zonotope():
    A, b = box_halfspaces([-1.0, 0.0], [2.0, 1.0])
    zi = polytope_to_zonotopes(A, b)
    assert len(zi) == 1
    h = interval_hull(zi.members[0])
    np.testing.assert_allclose(h.lower, [-1.0, 0.0])
    np.testing.assert_allclose(h.upper, [2.0, 1.0])


def test_polytope_interval_1d():
    zi = polytope_to_zonotopes([[1.0], [-1.0]], [2.0, 1.0])
    assert len(zi) == 1
    h = interval_hull(zi.members[0])
    assert (h.lower[0], h.upper[0]) == pytest.approx((-1.0, 2.0))


def _check_decomposition(A, b, rng, samples=10000):
    zi = polytope_to_zonotopes(A, b)
    assert len(zi) <= len(b)
    V = polytope_vertices(A, b)
    for z in zi.members:
        assert contains_points(z, V, 1e-9).all()
    # sample the intersection by rejection from the hull of the first member
    box = zi.hull()
    pts = rng.uniform(box.lower, box.upper, size=(samples * 4, A.shape[1]))
    inside = contains_points(zi, pts, 1e-9)
    assert inside.sum() > 0
    assert (pts[inside] @ np.asarray(A).T <= np.asarray(b) + 1e-6).all()


def test_polytope_triangle():
    A = np.array([[0.0, -1.0], [-1.0, 0.0], [1.0, 1.0]])
    b = np.array([0.0, 0.0, 1.0])
    _check_decomposition(A, b, np.random.default_rng(11))


def test_polytope_errors():
    with pytest.raises(ValueError):
        polytope_to_zonotopes([[1.0, 0.0]], [1.0])  # unbounded
    with pytest.raises(ValueError):
        polytope_to_zonotopes([[1.0], [-1.0]], [0.0, -1.0])  # empty


def random_polygon(rng, k):
    pts = rng.normal(size=(k + 6, 2))
    hull = ConvexHull(pts)
    eq = hull.equations[:8]
    return eq[:, :2], -eq[:, 2], hull


@pytest.mark.parametrize("seed", range(5))
def test_polytope_random(seed):
    rng = np.random.default_rng(100 + seed)
    A, b, hull = random_polygon(rng, 5)
    eq = hull.equations
    _check_decomposition(eq[:, :2], -eq[:, 2], rng, samples=2000)


def test_interval_box_intersection_none():
    assert IntervalBox([0.0], [1.0]).intersect(IntervalBox([2.0], [3.0])) is None


def test_zonotope_immutable():
    z = Zonotope([0.0], [[1.0]])
    with pytest.raises(ValueError):
        z.center[0] = 5.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert isinstance(np.eye(1) @ z, Zonotope)
