"""Damped Newton and the σ / ε continuation driver.

The continuation walks the homotopy

    Δu = σ ε⁻² (eᵘ − r² e⁻ᵘ),   u = σ g on ∂Ω,    σ: 0 → 1,

warm-starting each step from the previous solution, and then (optionally)
lowers ε at σ = 1.  A failed step is bisected.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import operator as op
from .boundary import Boundary, Zero
from .errors import (ConfigError, ContinuationFailed, LinearFailure, NewtonMaxIter,
                     NewtonStalled, Overflow, SolverFailure)
from .operator import Field
from .sparse import solve_linear

log = logging.getLogger(__name__)

DEFAULT_SIGMA_SCHEDULE = (0.0, 0.25, 0.5, 0.75, 1.0)
AUTO_EPS_THRESHOLD = 0.2


def auto_epsilon_schedule(eps):
    """1, 1/2, 1/4, ... down to (but above) ``eps``, then ``eps`` itself."""
    sched = [1.0]
    while sched[-1] / 2 > eps:
        sched.append(sched[-1] / 2)
    sched.append(float(eps))
    return tuple(sched)


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one continuation solve.

    ``newton_tol_abs=None`` resolves to ``1e-10 * ε⁻²`` at each visited ε.
    ``epsilon_schedule=None`` switches ε continuation on automatically when
    ``epsilon < 0.2``; pass an empty tuple to disable it.
    """

    epsilon: float = 1.0
    boundary: Boundary = field(default_factory=Zero)
    newton_tol_abs: float | None = None
    newton_tol_rel: float = 1e-12
    max_newton: int = 50
    max_backtracks: int = 30
    sigma_schedule: tuple = DEFAULT_SIGMA_SCHEDULE
    epsilon_schedule: tuple | None = None
    linear_tol: float = 1e-10
    linear_max_iter: int | None = None
    max_bisections: int = 8

    def __post_init__(self):
        eps = self.epsilon
        if not (isinstance(eps, (int, float)) and np.isfinite(eps) and eps > 0):
            raise ConfigError("solver.epsilon", f"must be > 0 (got {eps!r})")
        for name in ("newton_tol_rel", "linear_tol"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"solver.{name}", f"must be > 0 (got {v!r})")
        if self.newton_tol_abs is not None and not (
                np.isfinite(self.newton_tol_abs) and self.newton_tol_abs > 0):
            raise ConfigError("solver.newton_tol_abs", f"must be > 0 (got {self.newton_tol_abs!r})")
        for name in ("max_newton", "max_backtracks", "max_bisections"):
            if int(getattr(self, name)) < 0:
                raise ConfigError(f"solver.{name}", "must be >= 0")
        if self.linear_max_iter is not None and self.linear_max_iter < 1:
            raise ConfigError("solver.linear_max_iter", "must be >= 1")

        s = tuple(float(v) for v in self.sigma_schedule)
        if not s or s[-1] != 1.0:
            raise ConfigError("solver.sigma_schedule", "must end at 1")
        if any(v < 0 or v > 1 for v in s) or any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError("solver.sigma_schedule", "must be strictly increasing within [0, 1]")
        object.__setattr__(self, "sigma_schedule", s)

        e = self.epsilon_schedule
        if e is None:
            e = auto_epsilon_schedule(eps) if eps < AUTO_EPS_THRESHOLD else ()
        e = tuple(float(v) for v in e)
        if e:
            if e[-1] != float(eps):
                raise ConfigError("solver.epsilon_schedule", f"must end at epsilon={eps}")
            if any(v <= 0 for v in e) or any(b >= a for a, b in zip(e, e[1:])):
                raise ConfigError("solver.epsilon_schedule", "must be strictly decreasing and > 0")
        object.__setattr__(self, "epsilon_schedule", e)

    def tol_abs(self, eps):
        return self.newton_tol_abs if self.newton_tol_abs is not None else 1e-10 / eps ** 2

    def to_dict(self):
        return {
            "epsilon": self.epsilon,
            "boundary": self.boundary.to_dict(),
            "newton_tol_abs": self.newton_tol_abs,
            "newton_tol_rel": self.newton_tol_rel,
            "max_newton": self.max_newton,
            "max_backtracks": self.max_backtracks,
            "sigma_schedule": list(self.sigma_schedule),
            "epsilon_schedule": list(self.epsilon_schedule),
            "linear_tol": self.linear_tol,
            "linear_max_iter": self.linear_max_iter,
            "max_bisections": self.max_bisections,
        }


@dataclass
class NewtonResult:
    u: np.ndarray
    iterations: int
    residual_history: list
    converged: bool = True
    linear_iterations: int = 0


def damped_newton(residual, solve_step, u0, tol, max_iter, max_backtracks, noise=None):
    """Newton iteration with step halving on the max-norm of the residual.

    Parameters
    ----------
    residual : callable u -> R(u)
    solve_step : callable (u, R) -> du  solving J(u) du = -R
    tol : float
        Converged when every |R_i| <= max(tol, noise(u)_i).
    noise : callable u -> per-row rounding floor, optional

    Returns
    -------
    NewtonResult

    Raises
    ------
    NewtonStalled, NewtonMaxIter, Overflow, LinearFailure
    """
    u = np.array(u0, dtype=float)
    r = residual(u)
    rnorm = float(np.max(np.abs(r))) if len(r) else 0.0
    history = [rnorm]
    lin_its = 0

    def done(u, r):
        floor = tol if noise is None else np.maximum(tol, noise(u))
        return bool(np.all(np.abs(r) <= floor))

    k = 0
    while not done(u, r):
        if k >= max_iter:
            raise NewtonMaxIter(f"residual {rnorm:.3e} after {k} Newton steps (tol {tol:.1e})")
        du, its = solve_step(u, r)
        lin_its += its
        alpha = 1.0
        for _ in range(max_backtracks + 1):
            trial = u + alpha * du
            try:
                r_trial = residual(trial)
                t_norm = float(np.max(np.abs(r_trial)))
            except Overflow:
                t_norm = np.inf
            if t_norm < rnorm:
                break
            alpha *= 0.5
        else:
            raise NewtonStalled(
                f"no decrease of |R| = {rnorm:.3e} after {max_backtracks} halvings (step {k})")
        u, r, rnorm = trial, r_trial, t_norm
        history.append(rnorm)
        k += 1
    return NewtonResult(u, k, history, True, lin_its)


@dataclass
class ContinuationStep:
    sigma: float
    epsilon: float
    newton_iterations: int
    residual_history: list
    sup_abs_u: float
    field: Field | None = field(default=None, repr=False)

    def to_dict(self):
        return {"sigma": self.sigma, "epsilon": self.epsilon,
                "newton_iterations": self.newton_iterations,
                "residual_history": list(self.residual_history),
                "sup_abs_u": self.sup_abs_u}


@dataclass
class SolveReport:
    converged: bool = False
    steps: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    final_residual: float = float("nan")
    sup_abs_u: float = float("nan")
    sup_grad_u: float = float("nan")
    wall_time: float = 0.0

    @property
    def newton_iterations(self):
        return [s.newton_iterations for s in self.steps]

    @property
    def residual_history(self):
        return [s.residual_history for s in self.steps]

    @property
    def path(self):
        return [(s.sigma, s.epsilon) for s in self.steps]

    def to_dict(self):
        """JSON-ready summary; ``wall_time`` is left out (see ``cli``)."""
        return {
            "converged": self.converged,
            "newton_iterations": self.newton_iterations,
            "total_newton_iterations": int(sum(self.newton_iterations)),
            "final_residual": self.final_residual,
            "sup_abs_u": self.sup_abs_u,
            "sup_grad_u": self.sup_grad_u,
            "path": [list(p) for p in self.path],
            "steps": [s.to_dict() for s in self.steps],
            "bisections": list(self.failures),
        }


class _Problem:
    """Residual/Jacobian closures for one (grid, g, ε, σ)."""

    def __init__(self, grid, cfg, eps, sigma):
        self.grid = grid
        self.eps = eps
        self.sigma = sigma
        self.stencil = op.assemble_laplacian(grid)
        self.bvals = op.boundary_values(grid, cfg.boundary, sigma)
        self.symmetric = grid.is_aligned
        self.linear_tol = cfg.linear_tol
        self.linear_max_iter = cfg.linear_max_iter

    def residual(self, u):
        return op.residual_values(self.stencil, u, self.bvals, self.eps, self.sigma)

    def noise(self, u):
        return op.residual_noise(self.stencil, u, self.bvals, self.eps, self.sigma)

    def solve_step(self, u, r):
        # J du = -R  <=>  (-J) du = R, with -J positive definite on aligned grids
        neg_j = op.jacobian_matrix(self.stencil, u, self.eps, self.sigma).scaled(-1.0)
        du, stats = solve_linear(neg_j, r, self.symmetric, tol=self.linear_tol,
                                 max_iter=self.linear_max_iter)
        return du, stats.iterations


def _finish(grid, u, cfg, eps, sigma):
    return Field(grid, u, op.boundary_values(grid, cfg.boundary, sigma))


def _newton(grid, cfg, sigma, u0, eps):
    prob = _Problem(grid, cfg, eps, sigma)
    r0 = prob.residual(u0)
    tol = max(cfg.tol_abs(eps), cfg.newton_tol_rel * float(np.max(np.abs(r0))))
    return damped_newton(prob.residual, prob.solve_step, u0, tol, cfg.max_newton,
                         cfg.max_backtracks, noise=prob.noise)


def _summarise(report, grid, u_field, cfg, eps, sigma):
    prob = _Problem(grid, cfg, eps, sigma)
    report.final_residual = float(np.max(np.abs(prob.residual(u_field.values))))
    report.sup_abs_u = u_field.sup_abs()
    report.sup_grad_u = float(np.max(np.hypot(*op.gradient(u_field).T)))


def newton_solve(grid, cfg: SolverConfig, sigma, u0=None, eps=None):
    """Solve the σ-problem at a single ε by damped Newton.

    Returns
    -------
    (Field, SolveReport)
    """
    t0 = time.perf_counter()
    eps = cfg.epsilon if eps is None else eps
    u0 = np.zeros(grid.n) if u0 is None else np.asarray(
        u0.values if isinstance(u0, Field) else u0, dtype=float)
    res = _newton(grid, cfg, float(sigma), u0, eps)
    u = _finish(grid, res.u, cfg, eps, sigma)
    report = SolveReport(converged=True)
    report.steps.append(ContinuationStep(float(sigma), eps, res.iterations,
                                         res.residual_history, u.sup_abs()))
    _summarise(report, grid, u, cfg, eps, sigma)
    report.wall_time = time.perf_counter() - t0
    return u, report


def _walk(values, solve, start, prev, label, max_bisections, report, last_good_of):
    """Advance through ``values`` calling ``solve(value, u) -> u``; bisect on failure.

    ``prev`` is the parameter value ``start`` solves (None if it solves nothing).
    """
    u = start
    for target in values:
        inserted = 0
        pending = [target]
        while pending:
            val = pending[-1]
            try:
                u = solve(val, u)
            except (NewtonStalled, NewtonMaxIter, Overflow, LinearFailure) as exc:
                if prev is None or inserted >= max_bisections:
                    raise ContinuationFailed(
                        f"{label} continuation failed at {label}={val:g}: {exc}",
                        last_good=last_good_of(prev)) from exc
                mid = 0.5 * (prev + val)
                inserted += 1
                report.failures.append({label: val, "retry_at": mid, "reason": type(exc).__name__})
                log.info("%s step to %g failed (%s); inserting %g", label, val,
                         type(exc).__name__, mid)
                pending.append(mid)
                continue
            prev = val
            pending.pop()
    return u


def continuation_solve(grid, cfg: SolverConfig, u0=None, record_fields=False):
    """σ-continuation at the first scheduled ε, then ε-continuation at σ = 1.

    Returns
    -------
    (Field, SolveReport)

    Raises
    ------
    ContinuationFailed
        A step still failed after ``max_bisections`` midpoint insertions; the
        exception's ``last_good`` holds the last converged (σ, ε).
    """
    t0 = time.perf_counter()
    report = SolveReport()
    eps_path = cfg.epsilon_schedule or (cfg.epsilon,)
    eps0 = eps_path[0]
    u = np.zeros(grid.n) if u0 is None else np.asarray(
        u0.values if isinstance(u0, Field) else u0, dtype=float)

    def record(sigma, eps, res):
        f = _finish(grid, res.u, cfg, eps, sigma)
        report.steps.append(ContinuationStep(sigma, eps, res.iterations, res.residual_history,
                                             f.sup_abs(), f if record_fields else None))
        return res.u

    def sigma_step(sigma, u):
        return record(sigma, eps0, _newton(grid, cfg, sigma, u, eps0))

    def eps_step(eps, u):
        return record(1.0, eps, _newton(grid, cfg, 1.0, u, eps))

    def last(label):
        if label == "sigma":
            return lambda prev: None if prev is None else (prev, eps0)
        return lambda prev: (1.0, prev)

    u = _walk(cfg.sigma_schedule, sigma_step, u, None, "sigma", cfg.max_bisections, report,
              last("sigma"))
    if len(eps_path) > 1:
        u = _walk(eps_path[1:], eps_step, u, eps0, "epsilon", cfg.max_bisections, report,
                  last("epsilon"))
    field_u = _finish(grid, u, cfg, cfg.epsilon, 1.0)
    report.converged = True
    _summarise(report, grid, field_u, cfg, cfg.epsilon, 1.0)
    report.wall_time = time.perf_counter() - t0
    return field_u, report


__all__ = [
    "SolverConfig", "SolveReport", "ContinuationStep", "damped_newton", "newton_solve",
    "continuation_solve", "auto_epsilon_schedule", "SolverFailure",
]
