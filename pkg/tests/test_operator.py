import numpy as np
import pytest
from hypothesis import given, strategies as st

import semilinear.operator as op
from semilinear import Annulus, Constant, Disk, Field, LogR, Rectangle, Zero, build_grid
from semilinear.acceptance import jacobian_fd_slope, random_grid
from semilinear.errors import GridMismatch, Overflow


def quad(x, y):
    return x * x + y * y


def test_five_point_exact_on_quadratic(square_grid):
    u = Field.from_function(square_grid, quad)
    lap = op.assemble_laplacian(square_grid).apply(u.values, u.bvals)
    np.testing.assert_allclose(lap, 4.0, rtol=0, atol=1e-11)


def test_full_arm_weights(square_grid):
    st_ = op.assemble_laplacian(square_grid)
    h2 = square_grid.h ** 2
    assert np.all(st_.center == -4.0 / h2)
    assert np.all(st_.weights == 1.0 / h2)


def test_constant_annihilated(disk_grid):
    c = 2.75
    u = Field.from_function(disk_grid, Constant(c))
    lap = op.assemble_laplacian(disk_grid).apply(u.values, u.bvals)
    scale = np.abs(op.assemble_laplacian(disk_grid).center).max() * c
    assert np.max(np.abs(lap)) <= 1e-13 * scale


def test_shortley_weller_exact_on_quadratic(unit_disk):
    g = build_grid(unit_disk, 0.2)
    assert not g.is_aligned
    u = Field.from_function(g, quad)
    lap = op.assemble_laplacian(g).apply(u.values, u.bvals)
    np.testing.assert_allclose(lap, 4.0, rtol=0, atol=1e-9)


@given(st.floats(0.3, 1.5), st.floats(0.05, 0.3), st.floats(-0.3, 0.3))
def test_row_sums_vanish(radius, h, cx):
    g = build_grid(Disk((cx, 0.0), radius), h)
    st_ = op.assemble_laplacian(g)
    rows = st_.center + st_.weights.sum(axis=1)
    assert np.max(np.abs(rows)) <= 1e-9 * np.max(np.abs(st_.center))


@pytest.mark.parametrize("u,x,y,eps,f,fu", [
    (0.0, 1.0, 0.0, 1.0, 0.0, 2.0),
    (0.0, 0.0, 0.0, 1.0, 1.0, 1.0),
    (0.0, 0.0, 0.0, 0.5, 4.0, 4.0),
])
def test_rhs_examples(u, x, y, eps, f, fu):
    assert op.rhs_f(u, x, y, eps) == pytest.approx(f, abs=1e-15)
    assert op.rhs_fu(u, x, y, eps) == pytest.approx(fu, abs=1e-15)


@given(st.floats(0.01, 50.0), st.floats(-np.pi, np.pi), st.floats(0.05, 3.0))
def test_log_r_annihilates_f(r, t, eps):
    x, y = r * np.cos(t), r * np.sin(t)
    u = 0.5 * np.log(x * x + y * y)
    assert abs(op.rhs_f(u, x, y, eps)) <= 1e-13 * max(r, 1.0) / eps ** 2


@given(st.floats(-50, 50), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.05, 3.0))
def test_rhs_fu_positive(u, x, y, eps):
    v = op.rhs_fu(u, x, y, eps)
    assert v >= np.exp(u) / eps ** 2 > 0


def test_overflow_guard():
    with pytest.raises(Overflow):
        op.rhs_f(np.array([701.0]), 0.0, 0.0, 1.0)


def test_residual_homotopy_base(disk_grid):
    r = op.residual(Field.zeros(disk_grid), Zero(), 1.0, sigma=0.0)
    assert np.all(r.values == 0.0)


@pytest.mark.parametrize("eps", [1.0, 0.5])
def test_residual_of_zero_on_disk(disk_grid, eps):
    r = op.residual(Field.zeros(disk_grid), Zero(), eps, 1.0)
    x, y = disk_grid.xy.T
    np.testing.assert_allclose(r.values, -(1 - x * x - y * y) / eps ** 2, rtol=1e-14, atol=1e-14)


def test_residual_log_r_truncation(annulus):
    # full-arm rows are O(h^2); Shortley-Weller rows only O(h)
    full, near = [], []
    for h in (0.05, 0.025, 0.0125):
        g = build_grid(annulus, h)
        r = op.residual(Field.from_function(g, LogR()), LogR(), 1.0).values
        full.append(np.abs(r[~g.near_boundary]).max())
        near.append(np.abs(r[g.near_boundary]).max())
    rf = np.log2(np.array(full[:-1]) / full[1:])
    rn = np.log2(np.array(near[:-1]) / near[1:])
    assert np.all((rf > 1.7) & (rf < 2.3))
    assert np.all(rn > 0.5)
    assert full[-1] < 2e-4


def test_jacobian_sigma_zero_is_laplacian(disk_grid):
    u = Field(disk_grid, np.linspace(-1, 1, disk_grid.n))
    j = op.jacobian(u, 1.0, 0.0)
    np.testing.assert_array_equal(j.to_dense(), op.assemble_laplacian(disk_grid).matrix.to_dense())


def test_jacobian_single_node():
    h = 0.5
    g = build_grid(Rectangle(-h, h, -h, h), h)
    assert g.n == 1
    j = op.jacobian(Field.zeros(g), 1.0, 1.0).to_dense()
    np.testing.assert_allclose(j, [[-4.0 / h ** 2 - 1.0]], rtol=1e-15)


def test_jacobian_fd_on_random_grids():
    rng = np.random.default_rng(3)
    done = 0
    while done < 5:
        g = random_grid(rng)
        if g is None:
            continue
        slope, errs = jacobian_fd_slope(g, 0.7, 1.0, rng)
        assert 0.8 <= slope <= 1.2
        assert errs[-1] < 1e-4
        done += 1


@given(st.floats(0.5, 1.5), st.floats(0.08, 0.3), st.floats(0.1, 2.0), st.floats(0.0, 1.0),
       st.integers(0, 2 ** 32 - 1))
def test_jacobian_sign_structure(radius, h, eps, sigma, seed):
    g = build_grid(Disk((0.0, 0.0), radius), h)
    u = Field(g, np.random.default_rng(seed).uniform(-2, 2, g.n))
    a = op.jacobian(u, eps, sigma).to_dense()
    assert np.all(np.diag(a) < 0)
    off = a - np.diag(np.diag(a))
    assert np.all(off >= 0)


def test_jacobian_symmetry_pattern(unit_disk):
    sq = build_grid(Rectangle(0.0, 2.0, 0.0, 1.0), 0.1)
    a = op.jacobian(Field.zeros(sq), 1.0).to_dense()
    np.testing.assert_array_equal(a, a.T)
    g = build_grid(unit_disk, 0.1)
    a = op.jacobian(Field.zeros(g), 1.0).to_dense()
    asym = np.abs(a - a.T).max(axis=1) > 0
    # any asymmetric entry involves a node with a short arm
    short = np.any(g.theta < 1.0, axis=1)
    bad = np.argwhere(np.abs(a - a.T) > 0)
    assert np.all(short[bad[:, 0]] | short[bad[:, 1]])
    assert asym.any()


def test_field_validation(disk_grid, square_grid):
    with pytest.raises(GridMismatch):
        Field(disk_grid, np.zeros(disk_grid.n + 1))
    with pytest.raises(ValueError, match="finite"):
        Field(disk_grid, np.full(disk_grid.n, np.nan))
    with pytest.raises(GridMismatch):
        Field.zeros(disk_grid).check_same_grid(Field.zeros(square_grid))


def test_gradient_exact_on_quadratic(unit_disk):
    g = build_grid(unit_disk, 0.1)
    u = Field.from_function(g, lambda x, y: x * x + 3 * y * y + x * y)
    x, y = g.xy.T
    np.testing.assert_allclose(op.gradient(u), np.column_stack([2 * x + y, 6 * y + x]),
                               atol=1e-10)
