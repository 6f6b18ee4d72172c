import numpy as np
import pytest
from hypothesis import given, strategies as st

from semilinear import Disk, Field, SolverConfig, Zero, build_grid, continuation_solve
from semilinear.barrier import check_lemma1, solve_barrier, solve_dirichlet_poisson
from semilinear.errors import GridMismatch


def phi_exact(r, eps=1.0):
    return (r ** 2 / 4 - r ** 4 / 16 - 3 / 16) / eps ** 2


@pytest.fixture(scope="module")
def grids(unit_disk):
    return {h: build_grid(unit_disk, h) for h in (0.1, 0.05)}


def test_closed_form_disk(grids):
    errs = []
    for h, g in grids.items():
        bar = solve_barrier(g, Zero(), 1.0)
        r = np.hypot(*g.xy.T)
        node_err = np.max(np.abs(bar.phi.values - phi_exact(r)))
        sup_err = abs(bar.sup_abs_phi - 3 / 16)
        assert node_err <= 10 * h ** 2 and sup_err <= 10 * h ** 2
        errs.append(node_err)
        k = np.argmin(r)
        assert bar.phi.values[k] == pytest.approx(-0.1875, abs=10 * h ** 2)
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_bound_is_twice_sup(grids):
    bar = solve_barrier(grids[0.1], Zero(), 1.0)
    assert bar.bound == 2 * bar.sup_abs_phi
    assert bar.sup_abs_phi >= 0


def test_zero_source_hook(grids):
    g = grids[0.1]
    phi = solve_dirichlet_poisson(g, Zero(), np.zeros(g.n))
    assert np.all(phi.values == 0.0)


def test_epsilon_scaling(grids):
    g = grids[0.1]
    p1 = solve_barrier(g, Zero(), 1.0).phi.values
    p2 = solve_barrier(g, Zero(), 0.5).phi.values
    np.testing.assert_allclose(p2, 4 * p1, rtol=1e-8, atol=1e-12)


def test_solver_output_within_bound(grids):
    g = grids[0.05]
    u, _ = continuation_solve(g, SolverConfig())
    v = check_lemma1(u, solve_barrier(g, Zero(), 1.0))
    assert v.passed
    assert v.lhs <= 0.375 + v.margin


def test_trivial_and_violating_fields(grids):
    g = grids[0.1]
    bar = solve_barrier(g, Zero(), 1.0)
    assert check_lemma1(Field.zeros(g), bar).passed
    bad = check_lemma1(Field(g, np.full(g.n, 10 * (bar.bound + 1))), bar)
    assert not bad.passed and bad.status == "FAIL"


def test_grid_mismatch(grids):
    with pytest.raises(GridMismatch):
        check_lemma1(Field.zeros(grids[0.05]), solve_barrier(grids[0.1], Zero(), 1.0))


def test_sigma_scaled_barrier_every_step(grids):
    g = grids[0.1]
    for eps in (1.0, 0.5):
        bar = solve_barrier(g, Zero(), eps)
        _, rep = continuation_solve(g, SolverConfig(epsilon=eps), record_fields=True)
        for s in rep.steps:
            assert check_lemma1(s.field, bar.scaled(s.sigma)).passed


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.3, 1.5), st.floats(0.08, 0.25))
def test_discrete_maximum_principle(seed, radius, h):
    g = build_grid(Disk((0.0, 0.0), radius), h)
    src = np.random.default_rng(seed).uniform(0.0, 5.0, g.n)
    phi = solve_dirichlet_poisson(g, Zero(), src)
    assert np.all(phi.values <= 1e-12)
