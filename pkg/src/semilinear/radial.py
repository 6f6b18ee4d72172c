"""Radial reduction  u'' + u'/r = ε⁻² (eᵘ − r² e⁻ᵘ)  on [r_in, r_out].

Second-order finite differences on a uniform mesh, solved by the same damped
Newton as the 2-D problem.  With ``r_in = 0`` the axis row uses
Δu(0) ≈ 4 (u₁ − u₀) / Δr², which encodes u'(0) = 0.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigError, TooShort
from .nonlinear import damped_newton
from .operator import rhs_f, rhs_fu

ORACLE_NODES = 4096


@dataclass(frozen=True)
class RadialProblem:
    r_out: float
    u_out: float
    epsilon: float = 1.0
    r_in: float = 0.0
    u_in: float | None = None
    n: int = ORACLE_NODES

    def __post_init__(self):
        if not self.r_in >= 0:
            raise ConfigError("radial.r_in", "must be >= 0")
        if not self.r_out > self.r_in:
            raise ConfigError("radial.r_out", "must exceed r_in")
        if self.n < 16:
            raise ConfigError("radial.n", "need at least 16 nodes")
        if not self.epsilon > 0:
            raise ConfigError("radial.epsilon", "must be > 0")
        if self.r_in > 0 and self.u_in is None:
            raise ConfigError("radial.u_in", "required when r_in > 0")

    @property
    def dr(self):
        return (self.r_out - self.r_in) / (self.n - 1)


@dataclass
class RadialSolution:
    r: np.ndarray
    u: np.ndarray
    newton_iterations: int
    residual_history: list = field(repr=False)

    @property
    def dr(self):
        return float(self.r[1] - self.r[0])

    def __call__(self, r):
        """Piecewise-linear interpolation of the profile."""
        return np.interp(r, self.r, self.u)

    def derivative(self):
        return radial_derivative(self.u, self.dr)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "u"])
            for r, u in zip(self.r, self.u):
                w.writerow([f"{r:.17g}", f"{u:.17g}"])


def _system(p: RadialProblem):
    """Banded pieces of  L u + boundary = (u'' + u'/r)  on the unknown nodes."""
    n, dr = p.n, p.dr
    r = p.r_in + np.arange(n) * dr
    axis = p.r_in == 0.0
    first = 0 if axis else 1
    ri = r[first:n - 1]
    m = len(ri)
    lower = np.empty(m)
    diag = np.full(m, -2.0 / dr ** 2)
    upper = np.empty(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        lower[:] = 1.0 / dr ** 2 - 1.0 / (2 * dr * ri)
        upper[:] = 1.0 / dr ** 2 + 1.0 / (2 * dr * ri)
    if axis:
        lower[0] = 0.0
        diag[0] = -4.0 / dr ** 2
        upper[0] = 4.0 / dr ** 2
    bterm = np.zeros(m)
    bterm[-1] += upper[-1] * p.u_out
    if not axis:
        bterm[0] += lower[0] * p.u_in
    return r, first, ri, lower, diag, upper, bterm


def radial_solve(p: RadialProblem, u0=None) -> RadialSolution:
    """Damped-Newton solution of the radial boundary value problem.

    The default initial guess interpolates the boundary values linearly.
    """
    r, first, ri, lower, diag, upper, bterm = _system(p)
    m = len(ri)
    eps = p.epsilon

    def apply(u):
        out = diag * u + bterm
        out[1:] += lower[1:] * u[:-1]
        out[:-1] += upper[:-1] * u[1:]
        return out

    def residual(u):
        return apply(u) - rhs_f(u, ri, 0.0, eps)

    def noise(u):
        mag = (np.abs(diag * u) + np.abs(bterm) + rhs_fu(u, ri, 0.0, eps))
        mag[1:] += np.abs(lower[1:] * u[:-1])
        mag[:-1] += np.abs(upper[:-1] * u[1:])
        return 32.0 * np.finfo(float).eps * mag

    def solve_step(u, res):
        ab = np.zeros((3, m))
        ab[0, 1:] = upper[:-1]
        ab[1] = diag - rhs_fu(u, ri, 0.0, eps)
        ab[2, :-1] = lower[1:]
        return solve_banded((1, 1), ab, -res), 1

    if u0 is None:
        u_lo = p.u_out if p.u_in is None else p.u_in
        u0 = u_lo + (ri - p.r_in) / (p.r_out - p.r_in) * (p.u_out - u_lo)
    tol = max(1e-10 / eps ** 2, 1e-12 * float(np.max(np.abs(residual(u0)))))
    res = damped_newton(residual, solve_step, u0, tol, 50, 30, noise=noise)
    full = np.empty(p.n)
    full[first:p.n - 1] = res.u
    full[-1] = p.u_out
    if first:
        full[0] = p.u_in
    return RadialSolution(r, full, res.iterations, res.residual_history)


def radial_derivative(profile, dr):
    """du/dr: centred differences inside, second-order one-sided at both ends."""
    profile = np.asarray(profile, dtype=float)
    if profile.size < 3:
        raise TooShort("need at least 3 samples to differentiate")
    return np.gradient(profile, dr, edge_order=2)


def radial_problem_for(domain, g, eps, h=None, n=None):
    """Radial problem matching a centred disk/annulus with radial data ``g``."""
    from .geometry import Annulus, Disk

    if not isinstance(domain, (Disk, Annulus)) or domain.center != (0.0, 0.0):
        raise ValueError("radial oracle needs a disk or annulus centred at the origin")
    if not g.radial:
        raise ValueError("radial oracle needs rotation-invariant boundary data")
    if n is None:
        n = ORACLE_NODES
        if h is not None:
            size = domain.R if isinstance(domain, Disk) else domain.r_out - domain.r_in
            n = max(n, int(np.ceil(8 * size / h)) + 1)
    if isinstance(domain, Disk):
        return RadialProblem(domain.R, float(g(domain.R, 0.0)), eps, n=n)
    return RadialProblem(domain.r_out, float(g(domain.r_out, 0.0)), eps,
                         r_in=domain.r_in, u_in=float(g(domain.r_in, 0.0)), n=n)
