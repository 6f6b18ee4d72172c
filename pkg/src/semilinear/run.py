"""Orchestration behind the ``solve`` and ``converge`` commands."""
from __future__ import annotations

import logging
import time
import dataclasses
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .barrier import check_lemma1, solve_barrier
from .boundary import LogR
from .errors import ConfigError, GridError, SolverFailure
from .geometry import is_rotation_invariant
from .grid import build_grid
from .nonlinear import continuation_solve
from .operator import Field
from .output import write_field_csv, write_json, write_pgm, write_table_csv
from .radial import radial_problem_for, radial_solve

log = logging.getLogger(__name__)

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3
CONVERGE_REPORT = "convergence.json"


@dataclass
class RunResult:
    exit_code: int
    report: dict
    field: Field | None = None
    wall_time: float = 0.0
    files: dict = dataclasses.field(default_factory=dict)


def exact_solution(domain, g):
    """log r when it solves the Dirichlet problem exactly (origin outside the closure)."""
    if isinstance(g, LogR) and float(domain.sdf(0.0, 0.0)) > 0.0:
        return lambda x, y: 0.5 * np.log(x * x + y * y)
    return None


def _center(domain):
    return getattr(domain, "center", None) or (0.0, 0.0)


def _tol_disc(cfg):
    return 10.0 * cfg.h ** 2 / cfg.solver.epsilon ** 2


def run_check(spec, u, cfg):
    """Evaluate one configured check; returns a list of (verdict, hard) pairs."""
    eps = cfg.solver.epsilon
    tol = float(spec.params.get("tol", _tol_disc(cfg)))
    name = spec.name
    if name == "lemma1":
        barrier = solve_barrier(u.grid, cfg.boundary, eps)
        return [(check_lemma1(u, barrier, tol), True)]
    if name == "lemma2":
        return [(diag.gradient_bound_check(u, eps, cfg.boundary, tol), True)]
    if name == "symmetry":
        if not (is_rotation_invariant(cfg.domain) and cfg.boundary.radial):
            raise ConfigError("checks.symmetry", "needs a disk/annulus with radial boundary data")
        asym = diag.angular_asymmetry(u, _center(cfg.domain),
                                      n_rays=int(spec.params.get("n_rays", 64)))
        return [(diag.CheckVerdict.inequality(
            "symmetry", asym, 0.0, tol, f"angular asymmetry {asym:.3e}"), True)]
    if name == "moving_plane":
        return [(diag.moving_plane_check(u, lam, tol), True) for lam in spec.params["lambdas"]]
    if name == "monotonicity":
        v = diag.radial_monotonicity_2d(u, _center(cfg.domain), spec.params.get("tol"))
        # only the log-R regime of the global problem predicts monotonicity
        hard = bool(spec.params.get("hard", isinstance(cfg.boundary, LogR)))
        if not hard:
            v = diag.CheckVerdict(v.name, v.passed, v.lhs, v.rhs, v.margin,
                                  v.details + " (informational)", diag.INFO)
        return [(v, hard)]
    if name == "radial_oracle":
        prob = radial_problem_for(cfg.domain, cfg.boundary, eps, h=cfg.h)
        sol = radial_solve(prob)
        r = np.hypot(*u.grid.xy.T)
        err = float(np.max(np.abs(u.values - sol(r))))
        c = float(spec.params.get("C", 1.0))
        bound = max(1e-3, c * cfg.h ** 2)
        return [(diag.CheckVerdict.inequality(
            "radial_oracle", err, bound, 0.0,
            f"max |u - u_radial| = {err:.3e} (radial nodes {prob.n})"), True)]
    raise ConfigError("checks", f"unknown check {name!r}")


def _error_report(code, status, message, cfg=None):
    rep = {"status": status, "exit_code": code, "message": message}
    if cfg is not None:
        rep["config"] = cfg.to_dict()
    return rep


def run_solve(cfg, write=True) -> RunResult:
    """Build the grid, run continuation, evaluate checks, write outputs."""
    t0 = time.perf_counter()
    try:
        grid = build_grid(cfg.domain, cfg.h)
    except (GridError, ValueError) as exc:
        res = RunResult(EXIT_VALIDATION, _error_report(EXIT_VALIDATION, "validation_error",
                                                       f"grid: {exc}", cfg))
        return _finish(res, cfg, write, t0)
    try:
        u, report = continuation_solve(grid, cfg.solver)
    except SolverFailure as exc:
        rep = _error_report(EXIT_SOLVER, "solver_failure", f"{type(exc).__name__}: {exc}", cfg)
        rep["grid"] = grid.summary()
        last = getattr(exc, "last_good", None)
        if last is not None:
            rep["last_good"] = {"sigma": last[0], "epsilon": last[1]}
        return _finish(RunResult(EXIT_SOLVER, rep), cfg, write, t0)

    checks = {}
    failed = []
    for spec in cfg.checks:
        try:
            results = run_check(spec, u, cfg)
        except ConfigError as exc:
            rep = _error_report(EXIT_VALIDATION, "validation_error", str(exc), cfg)
            return _finish(RunResult(EXIT_VALIDATION, rep), cfg, write, t0)
        for verdict, hard in results:
            entry = verdict.to_dict()
            entry["hard"] = hard
            checks[verdict.name] = entry
            if hard and not verdict.passed:
                failed.append(verdict.name)

    rep = {
        "status": "check_failure" if failed else "ok",
        "exit_code": EXIT_CHECK if failed else EXIT_OK,
        "config": cfg.to_dict(),
        "grid": grid.summary(),
        "solve": report.to_dict(),
        "checks": checks,
        "failed_checks": failed,
    }
    exact = exact_solution(cfg.domain, cfg.boundary)
    if exact is not None:
        rep["exact_solution_error"] = float(np.max(np.abs(u.values - exact(*grid.xy.T))))
    return _finish(RunResult(rep["exit_code"], rep, u), cfg, write, t0)


def _finish(res, cfg, write, t0, report_name=None):
    res.wall_time = time.perf_counter() - t0
    if not write:
        return res
    out = cfg.output
    path = out.path(report_name or out.report_json)
    write_json(path, dict(res.report, timing={"wall_time": res.wall_time}))
    res.files["report_json"] = path
    if res.field is not None:
        if out.field_csv:
            write_field_csv(out.path(out.field_csv), res.field)
            res.files["field_csv"] = out.path(out.field_csv)
        if out.pgm:
            try:
                write_pgm(out.path(out.pgm), res.field)
                res.files["pgm"] = out.path(out.pgm)
            except OSError as exc:
                log.warning("PGM output skipped: %s", exc)
    return res


def _common_values(coarse, fine):
    """Values of both fields at the coarse nodes that are also fine nodes."""
    i_f = 2 * coarse.grid.ij[:, 0] - 1
    j_f = 2 * coarse.grid.ij[:, 1] - 1
    nx, ny = fine.grid.shape
    ok = (i_f < nx) & (j_f < ny)
    idx = np.full(coarse.grid.n, -1)
    idx[ok] = fine.grid.index[i_f[ok], j_f[ok]]
    keep = idx >= 0
    return coarse.values[keep], fine.values[idx[keep]]


def run_converge(cfg, levels, write=True) -> RunResult:
    """Solve at h, h/2, ..., h/2^(levels-1) and tabulate the observed order.

    With a known exact solution the error is max|u_h - u|; otherwise it is the
    self-convergence difference max|u_h - u_{h/2}| on shared nodes.
    """
    t0 = time.perf_counter()
    if levels < 2:
        raise ConfigError("levels", "need at least 2 refinement levels")
    exact = exact_solution(cfg.domain, cfg.boundary)
    hs = [cfg.h / 2 ** k for k in range(levels)]
    fields = []
    try:
        for h in hs:
            grid = build_grid(cfg.domain, h)
            u, _ = continuation_solve(grid, cfg.solver)
            fields.append(u)
    except (GridError, ValueError) as exc:
        rep = _error_report(EXIT_VALIDATION, "validation_error", f"grid: {exc}", cfg)
        return _finish(RunResult(EXIT_VALIDATION, rep), cfg, write, t0, CONVERGE_REPORT)
    except SolverFailure as exc:
        rep = _error_report(EXIT_SOLVER, "solver_failure", f"{type(exc).__name__}: {exc}", cfg)
        return _finish(RunResult(EXIT_SOLVER, rep), cfg, write, t0, CONVERGE_REPORT)

    if exact is not None:
        kind = "exact"
        errors = [float(np.max(np.abs(u.values - exact(*u.grid.xy.T)))) for u in fields]
        table_h = hs
    else:
        kind = "self"
        errors = []
        for a, b in zip(fields, fields[1:]):
            va, vb = _common_values(a, b)
            errors.append(float(np.max(np.abs(va - vb))))
        table_h = hs[:-1]
    orders = [None]
    for e0, e1 in zip(errors, errors[1:]):
        orders.append(float(np.log2(e0 / e1)) if e0 > 0 and e1 > 0 else None)

    rep = {
        "status": "ok",
        "exit_code": EXIT_OK,
        "config": cfg.to_dict(),
        "kind": kind,
        "levels": [{"h": h, "error": e, "order": p} for h, e, p in zip(table_h, errors, orders)],
        "n_interior": [u.grid.n for u in fields],
    }
    res = RunResult(EXIT_OK, rep)
    if write:
        out = cfg.output
        write_table_csv(out.path(out.convergence_csv), ["h", "error", "order"],
                        list(zip(table_h, errors, orders)))
        res.files["convergence_csv"] = out.path(out.convergence_csv)
    return _finish(res, cfg, write, t0, CONVERGE_REPORT)
