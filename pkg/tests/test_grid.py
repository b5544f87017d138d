import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ou_brunn import bodies as cb
from ou_brunn.grid import (
    ConvergenceError,
    GridError,
    assemble,
    build_grid,
    converged_eigenvalue,
    first_eigenpair,
    fitted_spacings,
    rayleigh_quotient,
    solve_body,
    write_eigenfunction_csv,
)
from ou_brunn.shooting import solve_interval, solve_radial


def test_stiffness_is_symmetric_and_mass_positive():
    form = assemble(build_grid(cb.Ball(1.0, (0.2, 0.1)), 0.1))
    A = form.stiffness
    assert abs(A - A.T).max() < 1e-12
    assert np.all(form.mass > 0)
    # M-matrix: nonpositive off-diagonal entries
    off = A - np.diag(A.diagonal())
    assert off.max() <= 0


def test_interval_eigenpair_matches_parabola():
    res = solve_body(cb.Interval(-1.0, 1.0), 0.005)
    assert res.lam == pytest.approx(2.0, rel=1e-3)
    x = res.u.grid.points[:, 0]
    np.testing.assert_allclose(res.u.values, (1 - x**2) / (1 - x**2).max(), atol=2e-4)


def test_interval_second_order():
    lam, bud = converged_eigenvalue(cb.Interval(-1.0, 1.0), [0.02, 0.01, 0.005])
    assert bud.order == pytest.approx(2.0, abs=0.1)
    assert abs(lam - 2.0) <= bud.eps


def test_offlattice_interval_budget_covers_oracle():
    body = cb.Interval(-2.5, 0.625)
    lam, bud = converged_eigenvalue(body, [0.02, 0.01, 0.005])
    assert bud.order > 1.5
    assert abs(lam - solve_interval(-2.5, 0.625).lam) <= bud.eps


def test_fitted_spacings_hit_both_endpoints():
    levels = fitted_spacings(cb.Interval(-0.3, 1.05), [0.02, 0.01, 0.005])
    for h, shift in levels:
        n = 1.35 / h
        assert n == pytest.approx(round(n))
        assert shift == (-0.3,)
    assert levels[0][0] / levels[1][0] == pytest.approx(2.0)
    assert fitted_spacings(cb.Ball(1.0), [0.1, 0.05]) == [(0.1, None), (0.05, None)]


def test_paraboloid_disk():
    # radius sqrt 2: u = 2 - |x|^2, eigenvalue 2
    res = solve_body(cb.Ball(math.sqrt(2.0)), 0.04)
    assert res.lam == pytest.approx(2.0, rel=1e-2)


def test_square_is_separable():
    res = solve_body(cb.Polygon.box(1.0), 0.04)
    assert res.lam == pytest.approx(4.0, rel=1e-3)
    rect = solve_body(cb.Polygon.box(0.6, 1.3), 0.04).lam
    oracle = solve_interval(-0.6, 0.6).lam + solve_interval(-1.3, 1.3).lam
    assert rect == pytest.approx(oracle, rel=2e-3)


def test_disk_convergence_order():
    lam, bud = converged_eigenvalue(cb.Ball(1.0), [0.08, 0.04, 0.02])
    assert bud.order >= 1.0
    assert lam == pytest.approx(solve_radial(2, 1.0).lam, rel=1e-2)


def test_rayleigh_of_eigenvector():
    form = assemble(build_grid(cb.SmoothBody([1.0, 0, 0, 0.15, 0]), 0.08))
    res = first_eigenpair(form)
    assert rayleigh_quotient(form, res.u) == pytest.approx(res.lam, rel=1e-12)
    assert res.u.values.min() >= 0 and res.u.values.max() == 1.0


@settings(max_examples=15, deadline=None)
@given(st.floats(0.3, 1.0), st.floats(-0.5, 0.5))
def test_rayleigh_bounds_eigenvalue(scale, tilt):
    form = assemble(build_grid(cb.Ball(1.0), 0.1))
    lam = first_eigenpair(form).lam
    p = form.grid.points
    trial = np.maximum(1 - (p**2).sum(axis=1) / scale, 0) * np.exp(tilt * p[:, 0]) + 1e-3
    assert rayleigh_quotient(form, trial) >= lam - 1e-10


@settings(max_examples=10, deadline=None)
@given(st.floats(0.3, 0.9), st.floats(-0.5, 0.5))
def test_domain_monotonicity(r, c):
    inner = cb.Interval(c - r, c + r)
    outer = cb.Interval(c - r - 0.2, c + r + 0.3)
    assert solve_body(inner, 0.01).lam > solve_body(outer, 0.01).lam


def test_fine_one_dimensional_grid_converges():
    res = solve_body(cb.Interval(-2.5, 0.625), 0.0025, cache=False)
    assert res.lam == pytest.approx(solve_interval(-2.5, 0.625).lam, abs=1e-6)


def test_coarse_grid_is_rejected():
    with pytest.raises(GridError):
        build_grid(cb.Interval(0.1, 0.2), 0.5)  # no lattice node inside


def test_budget_needs_three_levels():
    with pytest.raises(ValueError):
        converged_eigenvalue(cb.Interval(-1, 1), [0.02, 0.01])


def test_low_order_is_an_error():
    with pytest.raises(ConvergenceError):
        converged_eigenvalue(cb.Ball(1.0), [0.08, 0.04, 0.02], min_order=5.0)


def test_csv_roundtrip(tmp_path):
    res = solve_body(cb.Interval(-1, 1), 0.1)
    path = tmp_path / "u.csv"
    write_eigenfunction_csv(res.u, path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1], res.u.values)
