import math

import numpy as np
import pytest

from ou_brunn.shooting import BracketError, solve_halfline, solve_interval, solve_radial


def test_symmetric_interval_is_quadratic():
    # u = 1 - x^2 solves u'' - x u' = -2 u
    res = solve_interval(-1.0, 1.0)
    assert res.lam == pytest.approx(2.0, abs=1e-8)
    np.testing.assert_allclose(res.u, 1 - res.x**2, atol=1e-6)


def test_cubic_hermite_mode():
    # u = 3x - x^3 is positive on (0, sqrt 3) with eigenvalue 3
    res = solve_interval(0.0, math.sqrt(3.0))
    assert res.lam == pytest.approx(3.0, abs=1e-8)
    x = res.x
    np.testing.assert_allclose(res.u, (3 * x - x**3) / 2.0, atol=1e-6)


def test_halfline_linear_mode():
    res = solve_halfline(0.0, T=8)
    assert res.lam == pytest.approx(1.0, abs=1e-6)
    assert res.extra["truncation_delta"] < 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_radial_paraboloid(n):
    # u = n - |x|^2 on the ball of radius sqrt(n): eigenvalue 2
    res = solve_radial(n, math.sqrt(n))
    assert res.lam == pytest.approx(2.0, abs=1e-8)


def test_shift_changes_eigenvalue_monotonically():
    lam = [solve_interval(-1 + s, 1 + s).lam for s in (0.0, 0.5, 1.0)]
    assert lam[0] < lam[1] < lam[2]


def test_translated_intervals_reflect():
    assert solve_interval(-0.5, 1.5).lam == pytest.approx(solve_interval(-1.5, 0.5).lam, abs=1e-8)


def test_residual_is_small():
    res = solve_interval(-3.0, 0.5)
    assert res.residual < 1e-6
    assert res.boundary_value < 1e-6


def test_bad_bracket_is_reported():
    with pytest.raises(BracketError):
        solve_interval(-1.0, 1.0, bracket=(0.1, 1.0))


def test_argument_validation():
    with pytest.raises(ValueError):
        solve_radial(1, 1.0)
    with pytest.raises(ValueError):
        solve_halfline(0.0, T=4)
