import logging

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semilinear import Field, LogR, SolverConfig, Zero, build_grid, continuation_solve, newton_solve
from semilinear.barrier import solve_barrier
from semilinear.errors import ConfigError, ContinuationFailed, NewtonMaxIter, NewtonStalled
from semilinear.nonlinear import auto_epsilon_schedule, damped_newton

# radial oracle (independent scipy solve_bvp run) for the unit disk, g=0, eps=1
U_CENTER_UNIT_DISK = -0.156672917


@pytest.fixture(scope="module")
def disk05(unit_disk):
    return build_grid(unit_disk, 0.05)


@pytest.fixture(scope="module")
def disk_solution(disk05):
    return continuation_solve(disk05, SolverConfig(epsilon=1.0))


def test_sigma_zero_base_case(disk_grid):
    u, rep = newton_solve(disk_grid, SolverConfig(), 0.0)
    assert rep.newton_iterations == [0]
    assert np.all(u.values == 0.0)


def test_annulus_log_r_second_order(annulus):
    cfg = SolverConfig(boundary=LogR())
    errs = []
    for h in (0.1, 0.05):
        g = build_grid(annulus, h)
        u, _ = newton_solve(g, cfg, 1.0)
        errs.append(np.max(np.abs(u.values - 0.5 * np.log(np.sum(g.xy ** 2, axis=1)))))
    assert 1.7 <= np.log2(errs[0] / errs[1]) <= 2.3


def test_disk_solution_sign_and_center(disk05, disk_solution):
    u, rep = disk_solution
    assert rep.converged
    assert np.all(u.values <= 0.0)
    k = np.argmin(np.hypot(*disk05.xy.T))
    assert np.hypot(*disk05.xy[k]) < 1e-12
    assert abs(u.values[k] - U_CENTER_UNIT_DISK) <= 10 * disk05.h ** 2


def test_report_invariants(disk_solution):
    _, rep = disk_solution
    tol = SolverConfig().tol_abs(1.0)
    for hist in rep.residual_history:
        assert np.all(np.isfinite(hist))
        # every accepted damped step strictly decreases the max-norm residual
        assert all(b < a for a, b in zip(hist, hist[1:]))
    assert rep.final_residual <= tol
    assert rep.path == [(s, 1.0) for s in (0.0, 0.25, 0.5, 0.75, 1.0)]


def test_quadratic_tail(disk_solution):
    # below ~1e-8 the step is limited by the inexact linear solve, not by C r^2
    _, rep = disk_solution
    pairs = 0
    for hist in rep.residual_history:
        for a, b in zip(hist, hist[1:]):
            if 1e-8 <= a < 1e-3:
                assert b <= 1.0 * a * a
                pairs += 1
    assert pairs >= 4


def test_schedule_independence(disk05, disk_solution):
    u_ref, _ = disk_solution
    u, _ = continuation_solve(disk05, SolverConfig(sigma_schedule=(0.0, 1.0)))
    assert np.max(np.abs(u.values - u_ref.values)) <= 10 * SolverConfig().tol_abs(1.0)


def test_uniqueness_surrogate(disk05, disk_solution):
    u_ref, _ = disk_solution
    cfg = SolverConfig()
    phi = solve_barrier(disk05, Zero(), 1.0).phi
    u_a, _ = newton_solve(disk05, cfg, 1.0, u0=np.zeros(disk05.n))
    u_b, _ = newton_solve(disk05, cfg, 1.0, u0=phi)
    assert np.max(np.abs(u_a.values - u_b.values)) <= 10 * cfg.tol_abs(1.0)
    assert np.max(np.abs(u_a.values - u_ref.values)) <= 10 * cfg.tol_abs(1.0)


@pytest.mark.parametrize("eps", [1.0, 0.5])
def test_homotopy_bound_each_sigma(unit_disk, eps):
    g = build_grid(unit_disk, 0.05)
    _, rep = continuation_solve(g, SolverConfig(epsilon=eps), record_fields=True)
    bar = solve_barrier(g, Zero(), eps)
    tol = bar.default_tol()
    for s in rep.steps:
        assert s.sup_abs_u <= 2 * s.sigma * bar.sup_abs_phi + tol
        assert s.field.sup_abs() == s.sup_abs_u


def test_epsilon_schedule_growth(unit_disk):
    g = build_grid(unit_disk, 0.05)
    cfg = SolverConfig(epsilon=0.25, epsilon_schedule=(1.0, 0.5, 0.25))
    _, rep = continuation_solve(g, cfg)
    eps_steps = [s for s in rep.steps if s.sigma == 1.0]
    assert [s.epsilon for s in eps_steps] == [1.0, 0.5, 0.25]
    sups = [s.sup_abs_u for s in eps_steps]
    assert sups[0] < sups[1] < sups[2]
    for s in eps_steps:
        assert s.sup_abs_u <= 3 / (8 * s.epsilon ** 2)


def test_auto_epsilon_schedule():
    assert auto_epsilon_schedule(0.1) == (1.0, 0.5, 0.25, 0.125, 0.1)
    assert SolverConfig(epsilon=0.1).epsilon_schedule == (1.0, 0.5, 0.25, 0.125, 0.1)
    assert SolverConfig(epsilon=0.5).epsilon_schedule == ()
    assert SolverConfig(epsilon=0.1, epsilon_schedule=()).epsilon_schedule == ()


def test_warm_start_not_costlier(disk05, disk_solution, caplog):
    # performance property: logged, never failed
    _, warm = disk_solution
    _, cold = newton_solve(disk05, SolverConfig(), 1.0)
    with caplog.at_level(logging.INFO):
        logging.getLogger(__name__).info(
            "Newton iterations: continuation %d, cold start %d",
            sum(warm.newton_iterations), sum(cold.newton_iterations))


@pytest.mark.parametrize("kwargs,field", [
    (dict(epsilon=-1.0), "solver.epsilon"),
    (dict(epsilon=0.0), "solver.epsilon"),
    (dict(sigma_schedule=(0.0, 0.5)), "solver.sigma_schedule"),
    (dict(sigma_schedule=(0.5, 0.25, 1.0)), "solver.sigma_schedule"),
    (dict(epsilon=0.1, epsilon_schedule=(1.0, 0.2)), "solver.epsilon_schedule"),
    (dict(epsilon=0.1, epsilon_schedule=(0.1, 0.5, 0.1)), "solver.epsilon_schedule"),
    (dict(newton_tol_rel=0.0), "solver.newton_tol_rel"),
    (dict(newton_tol_abs=-1.0), "solver.newton_tol_abs"),
])
def test_config_validation(kwargs, field):
    with pytest.raises(ConfigError, match=field):
        SolverConfig(**kwargs)


def test_tol_scales_with_epsilon():
    assert SolverConfig().tol_abs(0.5) == pytest.approx(4e-10)
    assert SolverConfig(newton_tol_abs=1e-6).tol_abs(0.1) == 1e-6


def test_continuation_failure_reports_last_good(disk_grid):
    cfg = SolverConfig(max_newton=1, sigma_schedule=(0.0, 1.0), max_bisections=3)
    with pytest.raises(ContinuationFailed) as info:
        continuation_solve(disk_grid, cfg)
    sigma, eps = info.value.last_good
    assert eps == 1.0 and 0.0 <= sigma < 1.0


def test_bisection_recovers(disk_grid):
    # two Newton steps are not enough for sigma 0 -> 1 but suffice for shorter hops
    cfg = SolverConfig(max_newton=3, sigma_schedule=(0.0, 1.0), epsilon=0.5)
    u, rep = continuation_solve(disk_grid, cfg)
    assert rep.converged
    ref, _ = continuation_solve(disk_grid, SolverConfig(epsilon=0.5))
    assert np.max(np.abs(u.values - ref.values)) < 1e-9
    if rep.failures:
        assert all(f["reason"] == "NewtonMaxIter" for f in rep.failures)


def test_damped_newton_backtracks():
    # arctan: a full Newton step from 3 overshoots and diverges
    def res(u):
        return np.arctan(u)

    def step(u, r):
        return -r * (1 + u * u), 1

    out = damped_newton(res, step, np.array([3.0]), 1e-14, 50, 30)
    assert abs(out.u[0]) < 1e-14
    h = out.residual_history
    assert all(b < a for a, b in zip(h, h[1:]))


def test_damped_newton_errors():
    def step(u, r):
        return np.ones_like(u), 1

    with pytest.raises(NewtonStalled):
        damped_newton(lambda u: 1.0 + u * u, step, np.array([0.0]), 1e-12, 10, 5)
    with pytest.raises(NewtonMaxIter):
        damped_newton(lambda u: np.arctan(u), lambda u, r: (-r * (1 + u * u), 1),
                      np.array([1.0]), 1e-30, 2, 30)


@given(st.floats(0.2, 1.0), st.sampled_from([0.0, 0.3, -0.5]))
def test_solution_deterministic_and_bounded(eps, c):
    from semilinear import Constant, Disk
    g = build_grid(Disk((0.0, 0.0), 1.0), 0.2)
    cfg = SolverConfig(epsilon=eps, boundary=Constant(c))
    u1, r1 = continuation_solve(g, cfg)
    u2, r2 = continuation_solve(g, cfg)
    np.testing.assert_array_equal(u1.values, u2.values)
    assert r1.to_dict() == r2.to_dict()
    bar = solve_barrier(g, Constant(c), eps)
    assert u1.sup_abs() <= bar.bound + bar.default_tol()
