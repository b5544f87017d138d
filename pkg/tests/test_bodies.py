import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ou_brunn import bodies as cb

angles = st.floats(0, 2 * math.pi)
radii = st.floats(0.2, 3.0)


def test_interval_support_and_membership():
    I = cb.Interval(-1.0, 2.0)
    assert I.support(1.0) == 2.0
    assert I.support(-1.0) == 1.0
    assert np.array_equal(I.contains(np.array([[-1.5], [0.0], [1.99]])), [False, True, True])
    with pytest.raises(ValueError):
        cb.Interval(1.0, 1.0)


def test_exit_fraction_interval():
    I = cb.Interval(-1.0, 1.0)
    frac = I.exit_fraction(np.array([[0.9], [-0.95]]), np.array([[0.2], [-0.1]]))
    np.testing.assert_allclose(frac, [0.5, 0.5])


def test_square_vertices_and_support():
    sq = cb.Polygon.box(1.0)
    v = sq.vertices
    assert len(v) == 4
    assert np.allclose(np.sort(np.abs(v), axis=0), 1.0)
    d = np.array([1.0, 1.0]) / math.sqrt(2)
    assert sq.support(d) == pytest.approx(math.sqrt(2))


def test_mean_width_closed_forms():
    # disk: 2r; square of side 2: perimeter / pi
    assert cb.mean_width(cb.Ball(0.7)) == pytest.approx(1.4, rel=1e-12)
    assert cb.mean_width(cb.Polygon.box(1.0)) == pytest.approx(8 / math.pi, rel=1e-6)
    assert cb.mean_width(cb.Interval(-0.3, 1.2)) == pytest.approx(1.5)
    assert cb.mean_width(cb.SmoothBody([1.2, 0, 0, 0.2, 0])) == pytest.approx(2.4)


def test_mean_width_quadrature_agrees_with_exact():
    for body in (cb.Polygon.box(0.6, 1.3), cb.SmoothBody([1.0, 0, 0, 0, 0, 0.1, 0])):
        assert cb.mean_width(body, cb.DirectionGrid()) == pytest.approx(cb.mean_width(body), rel=1e-4)


def test_hausdorff_square_disk():
    # farthest gap sits at the corners
    d = cb.hausdorff_distance(cb.Polygon.box(1.0), cb.Ball(1.0))
    assert d == pytest.approx(math.sqrt(2) - 1, rel=1e-4)


@given(t=st.floats(0, 1), r0=radii, r1=radii, phi=angles)
def test_support_is_linear_under_minkowski(t, r0, r1, phi):
    b0, b1 = cb.Ball(r0, (0.1, -0.2)), cb.Polygon.box(r1, 0.5 * r1)
    bt = cb.minkowski_combine(t, b0, b1)
    d = np.array([math.cos(phi), math.sin(phi)])
    expected = (1 - t) * b0.support(d) + t * b1.support(d)
    assert bt.support(d) == pytest.approx(expected, abs=2e-3 * (r0 + r1))


def test_minkowski_exact_families():
    assert cb.minkowski_combine(0.25, cb.Interval(-1, 1), cb.Interval(0, 4)) == cb.Interval(-0.75, 1.75)
    ball = cb.minkowski_combine(0.5, cb.Ball(1.0), cb.Ball(3.0, (2.0, 0.0)))
    assert ball.radius == pytest.approx(2.0)
    assert ball.center == pytest.approx((1.0, 0.0))
    box = cb.minkowski_combine(0.5, cb.Polygon.box(1.0), cb.Polygon.box(3.0, 1.0))
    assert box.support(np.array([1.0, 0.0])) == pytest.approx(2.0)
    assert box.support(np.array([0.0, 1.0])) == pytest.approx(1.0)


@settings(max_examples=30)
@given(phi=angles)
def test_rotation_preserves_mean_width(phi):
    ell = cb.SmoothBody([1.2, 0, 0, 0.2, 0])
    assert cb.mean_width(cb.rotate(ell, phi)) == pytest.approx(cb.mean_width(ell), rel=1e-9)


def test_rotation_means_approach_ball():
    sq = cb.Polygon.box(1.0)
    ball = cb.Ball(0.5 * cb.mean_width(sq))
    d = [cb.hausdorff_distance(cb.rotation_mean(sq, [2 * math.pi * k / m for k in range(m)]), ball)
         for m in (1, 2, 4, 8, 16)]
    assert d[-1] < 0.25 * d[0]
    # quarter turns leave the square unchanged
    assert d[1] == pytest.approx(d[0]) and d[2] == pytest.approx(d[0])
    assert d[3] < 0.5 * d[0]


def test_symmetry_detection():
    assert cb.is_origin_symmetric(cb.Ball(1.0))
    assert cb.is_origin_symmetric(cb.SmoothBody([1.0, 0, 0, 0, 0, 0, 0, 0.06, 0]))
    assert not cb.is_origin_symmetric(cb.SmoothBody([1.0, 0, 0, 0, 0, 0.1, 0]))
    assert not cb.is_origin_symmetric(cb.Ball(1.0, (0.2, 0.0)))


def test_smooth_body_convexity_is_enforced():
    with pytest.raises(ValueError):
        cb.SmoothBody([1.0, 0, 0, 0, 0, 0.5, 0])


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        cb.minkowski_combine(0.5, cb.Interval(-1, 1), cb.Ball(1.0))
