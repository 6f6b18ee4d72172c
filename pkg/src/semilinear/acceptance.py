"""Built-in acceptance suite run by ``semilinear verify``.

Each criterion is a function returning a :class:`Criterion`; solves shared
between criteria are cached per :class:`Suite` so the whole run stays within a
few minutes.  Gradient-bound verdicts of every cached solve are collected for
criterion 7.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from . import operator as op
from .barrier import solve_barrier
from .boundary import LogR, Zero
from .config import parse_config
from .errors import SemilinearError
from .geometry import Annulus, Disk, Rectangle
from .grid import build_grid
from .nonlinear import DEFAULT_SIGMA_SCHEDULE, SolverConfig, continuation_solve, newton_solve
from .operator import Field
from .radial import radial_problem_for, radial_solve
from .run import EXIT_OK, run_solve
from .sparse import CSRMatrix, solve_bicgstab, solve_cg

UNIT_DISK = Disk((0.0, 0.0), 1.0)


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    details: str
    values: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name:<34s} {self.details} ({self.seconds:.1f}s)"


def _order(e0, e1):
    return float(np.log2(e0 / e1))


class Suite:
    """Holds the solve cache and gradient-bound verdicts for one run."""

    def __init__(self):
        self._solves = {}
        self.lemma2 = []

    def solve(self, domain, h, eps=1.0, g=Zero()):
        key = (domain, h, eps, g)
        if key not in self._solves:
            grid = build_grid(domain, h)
            cfg = SolverConfig(epsilon=eps, boundary=g)
            u, report = continuation_solve(grid, cfg)
            v = diag.gradient_bound_check(u, eps, g)
            label = f"{type(domain).__name__} h={h} eps={eps} g={g.to_dict()['type']}"
            self.lemma2.append((label, v))
            self._solves[key] = (u, report, cfg)
        return self._solves[key]

    # 1
    def exact_convergence(self):
        dom = Annulus((0.0, 0.0), 1.0, 2.0)
        hs = (0.1, 0.05, 0.025)
        errs = []
        for h in hs:
            u, _, _ = self.solve(dom, h, 1.0, LogR())
            x, y = u.grid.xy.T
            errs.append(float(np.max(np.abs(u.values - 0.5 * np.log(x * x + y * y)))))
        orders = [_order(a, b) for a, b in zip(errs, errs[1:])]
        ok = all(1.7 <= p <= 2.3 for p in orders) and errs[-1] < 5e-4 and errs[0] > errs[1] > errs[2]
        return ok, "errors " + ", ".join(f"{e:.2e}" for e in errs) + \
            "; orders " + ", ".join(f"{p:.2f}" for p in orders), {"errors": errs, "orders": orders}

    # 2
    def barrier_bound(self):
        parts, vals, ok = [], {}, True
        for eps in (1.0, 0.5):
            for h in (0.05, 0.025):
                u, _, _ = self.solve(UNIT_DISK, h, eps)
                bar = solve_barrier(u.grid, Zero(), eps)
                tol = 10.0 * h ** 2 / eps ** 2
                exact = 3.0 / (16.0 * eps ** 2)
                phi_err = abs(bar.sup_abs_phi - exact)
                good = u.sup_abs() <= bar.bound + tol and phi_err <= tol
                ok &= good
                vals[f"eps={eps},h={h}"] = {"sup_u": u.sup_abs(), "sup_phi": bar.sup_abs_phi,
                                            "phi_error": phi_err, "tol": tol}
                parts.append(f"eps={eps:g} h={h:g}: {u.sup_abs():.4f}<={bar.bound:.4f}, "
                             f"|Phi-3/16e^2|={phi_err:.1e}")
        return ok, "; ".join(parts), vals

    # 3
    def homotopy_bound(self):
        ok, worst = True, -np.inf
        h = 0.05
        for eps in (1.0, 0.5):
            u, report, _ = self.solve(UNIT_DISK, h, eps)
            bar = solve_barrier(u.grid, Zero(), eps)
            tol = 10.0 * h ** 2 / eps ** 2
            sigmas = [s.sigma for s in report.steps if s.epsilon == eps]
            missing = set(DEFAULT_SIGMA_SCHEDULE) - set(sigmas)
            ok &= not missing
            for s in report.steps:
                slack = s.sup_abs_u - (2 * s.sigma * bar.sup_abs_phi + tol)
                worst = max(worst, slack)
                ok &= slack <= 0
        return ok, f"max(sup|u_s| - 2s sup|Phi| - tol) = {worst:.3e}", {"worst_slack": worst}

    # 4
    def uniqueness(self):
        h = 0.05
        grid = build_grid(UNIT_DISK, h)
        cfg = SolverConfig(epsilon=1.0)
        tol = cfg.tol_abs(1.0)
        u_a, _ = newton_solve(grid, cfg, 1.0, u0=np.zeros(grid.n))
        phi = solve_barrier(grid, Zero(), 1.0).phi
        u_b, _ = newton_solve(grid, cfg, 1.0, u0=phi)
        diff = float(np.max(np.abs(u_a.values - u_b.values)))
        return diff <= 10 * tol, f"max|u(0) - u(Phi)| = {diff:.2e} <= {10 * tol:.0e}", \
            {"difference": diff, "newton_tol": tol}

    # 5
    def radial_symmetry(self):
        hs = (0.05, 0.025)
        asym = [diag.angular_asymmetry(self.solve(UNIT_DISK, h)[0]) for h in hs]
        ratio = asym[0] / asym[1] if asym[1] > 0 else np.inf
        c = 10.0
        ok = 3.0 <= ratio <= 5.0 and all(a <= c * h ** 2 for a, h in zip(asym, hs))
        u = self.solve(UNIT_DISK, hs[-1])[0]
        planes = [diag.moving_plane_check(u, lam) for lam in (0.0, 0.1, 0.25)]
        ok = ok and all(p.passed for p in planes)
        return ok, (f"asymmetry {asym[0]:.2e}, {asym[1]:.2e} (ratio {ratio:.2f}); moving plane "
                    + ", ".join(f"{p.name}:{p.status}" for p in planes)), \
            {"asymmetry": asym, "ratio": ratio, "moving_plane": [p.to_dict() for p in planes]}

    # 6
    def monotonicity(self):
        ok, parts, vals = True, [], {}
        for R, hs in ((5.0, (0.2, 0.1)), (10.0, (0.2, 0.1))):
            dom = Disk((0.0, 0.0), R)
            errs = []
            for h in hs:
                u, _, _ = self.solve(dom, h, 1.0, LogR())
                sol = radial_solve(radial_problem_for(dom, LogR(), 1.0, h=h))
                errs.append(ray_error(u, sol))
            c_est = errs[0] / hs[0] ** 2
            bound = max(1e-3, 1.25 * c_est * hs[1] ** 2)
            mono = diag.radial_monotonicity_2d(u)
            r = sol.r
            band = (r >= R / 2) & (r > 0)
            dev = float(np.max(np.abs(sol.u[band] - np.log(r[band]))))
            good = mono.passed and errs[1] <= bound and dev <= 0.01
            ok &= good
            vals[f"R={R:g}"] = {"ray_errors": errs, "bound": bound, "log_deviation": dev,
                                "monotonicity": mono.to_dict()}
            parts.append(f"R={R:g}: ray err {errs[1]:.2e}<={bound:.2e}, |u-log r|={dev:.4f}, "
                         f"mono {mono.status}")
        return ok, "; ".join(parts), vals

    # 7
    def gradient_bound(self):
        if not self.lemma2:
            for fn in (self.exact_convergence, self.barrier_bound, self.uniqueness,
                       self.radial_symmetry, self.monotonicity):
                fn()
        bad = [name for name, v in self.lemma2 if v.status == diag.FAIL]
        kinds = {}
        for _, v in self.lemma2:
            kinds[v.status] = kinds.get(v.status, 0) + 1
        return not bad, f"{len(self.lemma2)} solves, statuses {kinds}" + \
            (f"; violations: {bad}" if bad else ""), {"statuses": kinds, "violations": bad}

    # 8
    def jacobian(self, n_grids=20, seed=20240):
        rng = np.random.default_rng(seed)
        slopes, done = [], 0
        while done < n_grids:
            grid = random_grid(rng)
            if grid is None:
                continue
            eps = float(rng.uniform(0.2, 1.0))
            sigma = float(rng.uniform(0.0, 1.0))
            slope, _ = jacobian_fd_slope(grid, eps, sigma, rng)
            slopes.append(slope)
            done += 1
        ok = all(0.8 <= s <= 1.2 for s in slopes)
        return ok, f"{len(slopes)} grids, log-log slope in [{min(slopes):.3f}, {max(slopes):.3f}]", \
            {"slopes": slopes}

    # 9
    def linear_solvers(self, seed=777):
        rng = np.random.default_rng(seed)
        worst, ok, rows = 0.0, True, []
        for k in range(10):
            a, sym = random_system(rng, k)
            b = rng.standard_normal(a.n)
            x_ref = np.linalg.solve(a.to_dense(), b)
            methods = [("bicgstab", solve_bicgstab)] + ([("cg", solve_cg)] if sym else [])
            for name, solver in methods:
                x, _ = solver(a, b, tol=1e-12)
                rel = float(np.linalg.norm(x - x_ref) / np.linalg.norm(x_ref))
                worst = max(worst, rel)
                ok &= rel <= 1e-8
                rows.append({"system": k, "n": a.n, "method": name, "relative_error": rel})
        return ok, f"{len(rows)} solves, worst relative error {worst:.2e}", {"solves": rows}

    # 10
    def stiff(self):
        cfg = parse_config(BUNDLED_CONFIGS["stiff"])
        res = run_solve(cfg, write=False)
        chk = res.report.get("checks", {}).get("lemma1", {})
        ok = res.exit_code == EXIT_OK and bool(chk.get("pass"))
        return ok, (f"exit {res.exit_code}, sup|u| {chk.get('lhs', float('nan')):.3f} <= "
                    f"{chk.get('rhs', float('nan')):.2f}, {res.wall_time:.1f}s"), \
            {"exit_code": res.exit_code, "lemma1": chk, "wall_time": res.wall_time}


BUNDLED_CONFIGS = {
    "stiff": {
        "domain": {"type": "disk", "center": [0, 0], "R": 1},
        "h": 0.02,
        "boundary": {"type": "zero"},
        "solver": {"epsilon": 0.1},
        "checks": ["lemma1"],
    },
}

CRITERIA = (
    (1, "exact-solution convergence", Suite.exact_convergence),
    (2, "barrier bound", Suite.barrier_bound),
    (3, "homotopy a-priori bound", Suite.homotopy_bound),
    (4, "uniqueness surrogate", Suite.uniqueness),
    (5, "radial symmetry", Suite.radial_symmetry),
    (6, "monotonicity (large disks)", Suite.monotonicity),
    (7, "gradient bound", Suite.gradient_bound),
    (8, "jacobian finite differences", Suite.jacobian),
    (9, "linear solvers vs dense LU", Suite.linear_solvers),
    (10, "stiff regime", Suite.stiff),
)


def ray_error(u, sol, n_rays=16, n_samples=200):
    """max |u_h - u_radial| at interpolable points on rays from the origin."""
    R = float(sol.r[-1])
    angles = np.linspace(0.0, 2 * np.pi, n_rays, endpoint=False)
    r = np.linspace(0.0, R, n_samples)
    rr, aa = np.meshgrid(r, angles)
    v = diag.interpolate(u, rr * np.cos(aa), rr * np.sin(aa))
    ok = ~np.isnan(v)
    return float(np.max(np.abs(v[ok] - sol(rr[ok]))))


def random_grid(rng, min_theta=0.1):
    """Small random disk/annulus/rectangle grid, or None if it is degenerate.

    Grids with an arm fraction below ``min_theta`` are rejected: their stencil
    weights (~1/θh²) let rounding swamp the O(δ) finite-difference term.
    """
    h = float(rng.uniform(0.15, 0.35))
    kind = rng.integers(3)
    c = tuple(float(v) for v in rng.uniform(-0.3, 0.3, 2))
    if kind == 0:
        dom = Disk(c, float(rng.uniform(0.8, 1.5)))
    elif kind == 1:
        r_in = float(rng.uniform(0.3, 0.6))
        dom = Annulus(c, r_in, r_in + float(rng.uniform(0.8, 1.2)))
    else:
        x0, y0 = rng.uniform(-1.0, 0.0, 2)
        dom = Rectangle(float(x0), float(x0 + rng.uniform(0.8, 1.6)),
                        float(y0), float(y0 + rng.uniform(0.8, 1.6)))
    try:
        grid = build_grid(dom, h)
    except SemilinearError:
        return None
    if grid.n < 4 or grid.theta.min() < min_theta:
        return None
    return grid


def jacobian_fd_slope(grid, eps, sigma, rng, deltas=(1e-4, 1e-5, 1e-6)):
    """Least-squares slope of log‖(R(u+δv) − R(u))/δ − Jv‖∞ against log δ."""
    g = Zero()
    u = Field(grid, rng.uniform(-1.0, 1.0, grid.n))
    v = rng.uniform(-1.0, 1.0, grid.n)
    r0 = op.residual(u, g, eps, sigma).values
    jv = op.jacobian(u, eps, sigma) @ v
    errs = []
    for d in deltas:
        r1 = op.residual(Field(grid, u.values + d * v), g, eps, sigma).values
        errs.append(float(np.max(np.abs((r1 - r0) / d - jv))))
    errs = np.array(errs)
    if np.any(errs <= 0):
        return 1.0, errs
    slope = float(np.polyfit(np.log10(deltas), np.log10(errs), 1)[0])
    return slope, errs


def random_system(rng, k):
    """k-th test system: SPD, nonsymmetric, or a negated Jacobian from a grid."""
    kind = k % 3
    if kind == 2:
        while True:
            grid = random_grid(rng, min_theta=0.0)
            if grid is not None and grid.n <= 400:
                break
        u = Field(grid, rng.uniform(-1.0, 1.0, grid.n))
        a = op.jacobian(u, float(rng.uniform(0.2, 1.0))).scaled(-1.0)
        return a, grid.is_aligned
    n = int(rng.integers(50, 401))
    dense = np.zeros((n, n))
    mask = rng.random((n, n)) < 4.0 / n
    dense[mask] = rng.standard_normal(mask.sum())
    if kind == 0:
        dense = dense @ dense.T + np.eye(n)
    else:
        dense += np.diag(np.abs(dense).sum(axis=1) + 1.0)
    return CSRMatrix.from_dense(dense), kind == 0


def run_suite(only=None, echo=print):
    """Run the selected criteria (all by default); returns a list of Criterion."""
    suite = Suite()
    results = []
    for number, name, fn in CRITERIA:
        if only and number not in only:
            continue
        t0 = time.perf_counter()
        try:
            ok, details, values = fn(suite)
        except (SemilinearError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            ok, details, values = False, f"error: {type(exc).__name__}: {exc}", {}
        res = Criterion(number, name, bool(ok), details, values, time.perf_counter() - t0)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
