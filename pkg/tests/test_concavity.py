import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ou_brunn import bodies as cb
from ou_brunn.concavity import (
    LogField,
    check_laplacian_sign,
    check_midpoint_logconcavity,
    check_starshaped_gradient,
    check_strong_logconcavity,
    core_hessians,
    discrete_hessian,
)
from ou_brunn.grid import GridFunction, build_grid, solve_body


def field(body, h, f):
    return GridFunction.from_callable(build_grid(body, h), f)


def bimodal(p):
    x = p[:, 0]
    return np.exp(-((x - 1) ** 2) / 0.1) + np.exp(-((x + 1) ** 2) / 0.1)


def test_bimodal_counterexample_is_flagged():
    u = field(cb.Interval(-2.0, 2.0), 0.02, bimodal)
    rep = check_midpoint_logconcavity(u, tau=0.01)
    assert rep.violations > 0
    assert rep.margin < -1.0
    # the worst pair straddles the valley
    (a,), (b,) = rep.location
    assert a * b < 0


def test_bimodal_counterexample_2d():
    def f(p):
        return np.exp(-((p[:, 0] - 0.5) ** 2 + p[:, 1] ** 2) / 0.05) + np.exp(-((p[:, 0] + 0.5) ** 2 + p[:, 1] ** 2) / 0.05)
    u = field(cb.Ball(1.0), 0.05, f)
    assert check_midpoint_logconcavity(u, tau=0.01).violations > 0


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-0.5, 0.5))
def test_gaussians_are_log_concave(a, c):
    u = field(cb.Interval(-1.5, 1.5), 0.05, lambda p: np.exp(-a * (p[:, 0] - c) ** 2))
    assert check_midpoint_logconcavity(u, tau=0.01, tol=1e-12).violations == 0


def test_eigenfunctions_pass_midpoint_check():
    for body, h in ((cb.Interval(-1, 1), 0.005), (cb.Ball(1.0), 0.04), (cb.Polygon.box(0.6, 1.3), 0.04)):
        u = solve_body(body, h).u
        rep = check_midpoint_logconcavity(u, tau=0.01, tol=10 * h * h, max_pairs=200_000)
        assert rep.violations == 0, body


def test_sampling_is_seeded():
    u = solve_body(cb.Ball(1.0), 0.04).u
    a = check_midpoint_logconcavity(u, max_pairs=5000, seed=3)
    b = check_midpoint_logconcavity(u, max_pairs=5000, seed=3)
    assert a.margin == b.margin and a.samples == b.samples == 5000


def test_hessian_of_anisotropic_gaussian():
    u = field(cb.Ball(1.0), 0.05, lambda p: np.exp(-0.5 * p[:, 0] ** 2 - p[:, 1] ** 2 - 0.3 * p[:, 0] * p[:, 1]))
    W = LogField(u, tau=0.1)
    idx, H = core_hessians(W)
    np.testing.assert_allclose(H, np.broadcast_to([[1.0, 0.3], [0.3, 2.0]], H.shape), atol=1e-9)
    centre = np.argmin(np.abs(u.grid.axes[0])), np.argmin(np.abs(u.grid.axes[1]))
    np.testing.assert_allclose(discrete_hessian(W, centre), [[1.0, 0.3], [0.3, 2.0]], atol=1e-9)


def test_hessian_outside_core_is_none():
    u = field(cb.Interval(-1, 1), 0.1, lambda p: 1 - p[:, 0] ** 2)
    W = LogField(u, tau=0.5)
    assert discrete_hessian(W, (0,)) is None


def test_strong_margin_sign():
    body = cb.Ball(1.0)
    concave = field(body, 0.05, lambda p: np.exp(-(p**2).sum(axis=1)))
    flat = field(body, 0.05, lambda p: np.exp(p[:, 0]))
    convex = field(body, 0.05, lambda p: np.exp(0.5 * (p**2).sum(axis=1)))
    assert check_strong_logconcavity(concave, boundary_layers=0).margin == pytest.approx(2.0)
    assert abs(check_strong_logconcavity(flat, boundary_layers=0).margin) < 1e-9
    assert check_strong_logconcavity(convex, boundary_layers=0).margin < 0


def test_symmetric_eigenfunctions_chain():
    for body, h in ((cb.Interval(-1, 1), 0.005), (cb.Ball(1.0), 0.02), (cb.SmoothBody([1.2, 0, 0, 0.2, 0]), 0.02)):
        u = solve_body(body, h).u
        assert check_strong_logconcavity(u).margin > 0
        assert check_laplacian_sign(u).margin < 0
        assert check_starshaped_gradient(u).margin <= 10 * h * h


def test_radial_check_catches_off_centre_peak():
    u = field(cb.Ball(1.0), 0.05, lambda p: np.exp(-((p[:, 0] - 0.4) ** 2 + p[:, 1] ** 2)))
    assert check_starshaped_gradient(u).margin > 0.01


def test_boundary_layers_shrink_core():
    u = solve_body(cb.Ball(1.0), 0.04).u
    assert LogField(u, 0.01, boundary_layers=5).core.sum() < LogField(u, 0.01).core.sum()
