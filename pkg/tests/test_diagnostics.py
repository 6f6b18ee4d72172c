import numpy as np
import pytest
from hypothesis import given, strategies as st

from semilinear import (Annulus, Disk, Field, LogR, SolverConfig, build_grid,
                        continuation_solve)
from semilinear import diagnostics as diag
from semilinear.errors import CenterOutsideDomain, EmptyReflectionRegion


@pytest.fixture(scope="module")
def disk_fields(unit_disk):
    out = {}
    for h in (0.1, 0.05):
        out[h] = continuation_solve(build_grid(unit_disk, h), SolverConfig())[0]
    return out


def r2(x, y):
    return x * x + y * y


def test_asymmetry_radial_field(disk_grid):
    u = Field.from_function(disk_grid, r2)
    # bilinear interpolation error of x^2 + y^2 is at most h^2 / 2
    assert diag.angular_asymmetry(u) <= 0.5 * disk_grid.h ** 2


def test_asymmetry_linear_field(disk_grid):
    u = Field.from_function(disk_grid, lambda x, y: x)
    r_max = 1.0 - disk_grid.h
    assert diag.angular_asymmetry(u) == pytest.approx(2 * r_max, rel=1e-9)


def test_asymmetry_converged_disk(disk_fields):
    a = [diag.angular_asymmetry(disk_fields[h]) for h in (0.1, 0.05)]
    assert 3.0 <= a[0] / a[1] <= 5.0
    assert a[1] <= 0.05 ** 2


def test_asymmetry_center_outside(disk_grid):
    with pytest.raises(CenterOutsideDomain):
        diag.angular_asymmetry(Field.zeros(disk_grid), center=(3.0, 0.0))


def test_moving_plane_quadratic(disk_grid):
    u = Field.from_function(disk_grid, r2)
    v = diag.moving_plane_check(u, 0.3)
    assert v.passed and v.lhs <= 0.0
    v0 = diag.moving_plane_check(u, 0.0)
    assert v0.passed and v0.lhs <= 1e-15


def test_moving_plane_exact_reflection(disk_grid):
    u = Field.from_function(disk_grid, r2)
    lam = 0.3
    left = disk_grid.xy[:, 0] < lam
    x, y = disk_grid.xy[left].T
    w = diag.interpolate(u, 2 * lam - x, y) - u.values[left]
    ok = ~np.isnan(w)
    # w = 4 lam (lam - x) exactly when the mirror node is a lattice node
    np.testing.assert_allclose(w[ok], 4 * lam * (lam - x[ok]), atol=disk_grid.h ** 2)


@pytest.mark.parametrize("lam", [0.0, 0.1, 0.25])
def test_moving_plane_converged_disk(disk_fields, lam):
    assert diag.moving_plane_check(disk_fields[0.05], lam).passed


def test_moving_plane_detects_asymmetry(disk_grid):
    u = Field.from_function(disk_grid, lambda x, y: -x)
    v = diag.moving_plane_check(u, 0.25)
    assert not v.passed and v.status == "FAIL"


def test_moving_plane_errors(disk_grid):
    u = Field.zeros(disk_grid)
    with pytest.raises(EmptyReflectionRegion):
        diag.moving_plane_check(u, 5.0)
    with pytest.raises(ValueError):
        diag.moving_plane_check(u, -0.1)


def test_plane_zero_implies_mirror_symmetry(disk_fields):
    u = disk_fields[0.05]
    v = diag.moving_plane_check(u, 0.0)
    assert v.passed
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    for r in (0.2, 0.5, 0.8):
        a = diag.interpolate(u, r * np.cos(t), r * np.sin(t))
        b = diag.interpolate(u, -r * np.cos(t), r * np.sin(t))
        assert np.nanmax(np.abs(a - b)) <= v.margin


def test_monotonicity_examples(disk_grid):
    up = diag.radial_monotonicity_2d(Field.from_function(disk_grid, r2))
    assert up.passed and -up.lhs >= 2 * disk_grid.h - 1e-12
    down = diag.radial_monotonicity_2d(Field.from_function(disk_grid, lambda x, y: -r2(x, y)))
    assert not down.passed
    with pytest.raises(CenterOutsideDomain):
        diag.radial_monotonicity_2d(Field.zeros(disk_grid), center=(5.0, 5.0))


def test_monotonicity_large_disk():
    g = build_grid(Disk((0.0, 0.0), 10.0), 0.2)
    u, _ = continuation_solve(g, SolverConfig(boundary=LogR()))
    assert diag.radial_monotonicity_2d(u).passed


def test_gradient_bound_examples(disk_grid):
    v = diag.gradient_bound_check(Field.zeros(disk_grid), 1.0)
    assert v.passed and v.lhs == 0.0
    assert diag.gradient_bound(0.0, 1.0) == 1.0


def test_gradient_bound_annulus_boundary_branch(annulus):
    g = build_grid(annulus, 0.05)
    u, _ = continuation_solve(g, SolverConfig(boundary=LogR()))
    v = diag.gradient_bound_check(u, 1.0, LogR())
    assert v.status == diag.BOUNDARY_MAX and v.passed
    # |grad log r| = 1/r, largest next to r_in = 1
    assert v.lhs == pytest.approx(1.0, abs=0.1)


def test_gradient_bound_interior_disk(disk_fields):
    v = diag.gradient_bound_check(disk_fields[0.05], 1.0)
    assert v.status == diag.PASS and v.passed


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 5))
def test_verdict_inequality(lhs, rhs, margin):
    v = diag.CheckVerdict.inequality("x", lhs, rhs, margin)
    assert v.passed == (lhs <= rhs + margin)
    assert v.to_dict()["pass"] == v.passed


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2),
       st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_interpolation_exact_on_bilinear(a, b, c, d, x, y):
    g = build_grid(Disk((0.0, 0.0), 1.0), 0.1)

    def f(x, y):
        return a + b * x + c * y + d * x * y

    u = Field.from_function(g, f)
    v = diag.interpolate(u, x, y)
    if not np.isnan(v):
        assert v == pytest.approx(f(x, y), abs=1e-12)


def test_annulus_interpolation_inside_hole_is_nan():
    g = build_grid(Annulus((0.0, 0.0), 0.5, 1.0), 0.1)
    assert np.isnan(diag.interpolate(Field.zeros(g), 0.0, 0.0))
