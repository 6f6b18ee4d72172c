"""Numerical checks of symmetry, monotonicity and the gradient bound.

Off-lattice values come from bilinear interpolation on the lattice; a sample
is dropped (NaN) when one of its four corners carries no value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operator as op
from .errors import CenterOutsideDomain, EmptyReflectionRegion
from .geometry import Annulus, Disk
from .grid import _OFFSETS

PASS, FAIL, BOUNDARY_MAX, INFO = "PASS", "FAIL", "BOUNDARY_MAX", "INFO"


@dataclass(frozen=True)
class CheckVerdict:
    """Outcome of one check.

    For inequality checks ``passed == (lhs <= rhs + margin)``.  ``status`` is
    one of PASS, FAIL, BOUNDARY_MAX (gradient maximum next to the boundary, the
    interior inequality does not apply) or INFO (reported, not enforced).
    """

    name: str
    passed: bool
    lhs: float
    rhs: float
    margin: float
    details: str = ""
    status: str = PASS

    @classmethod
    def inequality(cls, name, lhs, rhs, margin, details=""):
        ok = bool(lhs <= rhs + margin)
        return cls(name, ok, float(lhs), float(rhs), float(margin), details,
                   PASS if ok else FAIL)

    def to_dict(self):
        return {"name": self.name, "pass": self.passed, "status": self.status,
                "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "details": self.details}


def lattice_values(u):
    """Field values on the full lattice; NaN where nothing is known.

    Boundary points that coincide with lattice nodes (full-length boundary
    arms, snapped nodes) receive their Dirichlet value when the field has one.
    """
    grid = u.grid
    out = np.full(grid.shape, np.nan)
    out[grid.ij[:, 0], grid.ij[:, 1]] = u.values
    if u.bvals is not None:
        for d, (di, dj) in enumerate(_OFFSETS):
            full = grid.boundary_arms[:, d] & (grid.theta[:, d] == 1.0)
            out[grid.ij[full, 0] + di, grid.ij[full, 1] + dj] = u.bvals[full, d]
    return out


def interpolate(u, x, y, lattice=None):
    """Bilinear interpolation of ``u`` at points (x, y); NaN where unavailable."""
    grid = u.grid
    lat = lattice_values(u) if lattice is None else lattice
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx = (x - grid.anchor[0]) / grid.h + 1.0
    sy = (y - grid.anchor[1]) / grid.h + 1.0
    i = np.floor(sx + 1e-9).astype(np.int64)
    j = np.floor(sy + 1e-9).astype(np.int64)
    fx = np.clip(sx - i, 0.0, 1.0)
    fy = np.clip(sy - j, 0.0, 1.0)
    fx = np.where(fx < 1e-9, 0.0, fx)
    fy = np.where(fy < 1e-9, 0.0, fy)
    nx, ny = grid.shape
    ok = (i >= 0) & (j >= 0) & (i < nx - 1) & (j < ny - 1)
    i = np.where(ok, i, 0)
    j = np.where(ok, j, 0)
    total = np.zeros(np.broadcast(x, y).shape)
    for di, dj, w in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                      (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
        v = lat[i + di, j + dj]
        total = total + np.where(w == 0.0, 0.0, w * v)
    return np.where(ok, total, np.nan)


def _radial_extent(domain, center):
    """(r_lo, r_hi) of circles about ``center`` that may fit in the domain."""
    x_min, x_max, y_min, y_max = domain.bounding_box
    cx, cy = center
    if not (x_min < cx < x_max and y_min < cy < y_max):
        raise CenterOutsideDomain(f"center {center} lies outside the domain's bounding box")
    if isinstance(domain, Disk):
        return 0.0, domain.R - np.hypot(cx - domain.center[0], cy - domain.center[1])
    if isinstance(domain, Annulus):
        return domain.r_in, domain.r_out
    return 0.0, max(x_max - x_min, y_max - y_min)


def angular_asymmetry(u, center=(0.0, 0.0), n_rays=64, radii=None, n_radii=32):
    """max over sampled radii of (max - min over ``n_rays`` angles) of u.

    Radii whose circle is not fully interpolable are skipped.  Returns 0 for
    an exactly radial field (up to interpolation error).
    """
    grid = u.grid
    lat = lattice_values(u)
    if radii is None:
        lo, hi = _radial_extent(grid.domain, center)
        radii = np.linspace(lo + grid.h, hi - grid.h, n_radii)
    angles = np.linspace(0.0, 2 * np.pi, n_rays, endpoint=False)
    worst = None
    for r in np.atleast_1d(radii):
        vals = interpolate(u, center[0] + r * np.cos(angles), center[1] + r * np.sin(angles),
                           lattice=lat)
        if np.any(np.isnan(vals)):
            continue
        spread = float(vals.max() - vals.min())
        worst = spread if worst is None else max(worst, spread)
    if worst is None:
        raise CenterOutsideDomain(f"no sampling circle about {center} fits inside the domain")
    return worst


def moving_plane_check(u, lam, tol_disc=None) -> CheckVerdict:
    """Reflect across x = λ and test w = u(2λ − x, y) − u(x, y) on {x < λ}.

    PASS iff min w ≥ −tol; at λ = 0 additionally |w| ≤ tol everywhere.
    Only nodes whose reflection is interpolable take part.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    grid = u.grid
    tol = 10.0 * grid.h ** 2 if tol_disc is None else float(tol_disc)
    left = grid.xy[:, 0] < lam - 1e-12 * grid.h
    xs, ys = grid.xy[left, 0], grid.xy[left, 1]
    v = interpolate(u, 2 * lam - xs, ys)
    ok = ~np.isnan(v)
    if not ok.any():
        raise EmptyReflectionRegion(f"no node in x < {lam} has an interpolable mirror image")
    w = v[ok] - u.values[left][ok]
    w_min = float(w.min())
    name = f"moving_plane[{lam:g}]"
    if lam == 0.0:
        w_abs = float(np.max(np.abs(w)))
        passed = w_abs <= tol
        return CheckVerdict(name, passed, w_abs, 0.0, tol,
                            f"lambda=0: max|w| = {w_abs:.3e} over {ok.sum()} nodes",
                            PASS if passed else FAIL)
    # inequality  -min w <= 0 + tol
    return CheckVerdict.inequality(name, -w_min, 0.0, tol,
                                   f"min w = {w_min:.3e} over {ok.sum()} nodes")


def second_derivative_scale(u):
    """max |u_xx|, |u_yy| from second differences at full-arm nodes."""
    grid = u.grid
    full = ~grid.near_boundary
    if not full.any():
        return 0.0
    nb = grid.neighbors[full]
    c = u.values[full]
    v = u.values
    uxx = (v[nb[:, 0]] - 2 * c + v[nb[:, 1]]) / grid.h ** 2
    uyy = (v[nb[:, 2]] - 2 * c + v[nb[:, 3]]) / grid.h ** 2
    return float(max(np.max(np.abs(uxx)), np.max(np.abs(uyy))))


def radial_derivative_2d(u, center=(0.0, 0.0)):
    """(r, ∂u/∂r) at interior nodes with r > h."""
    grid = u.grid
    gx, gy = op.gradient(u).T
    px = grid.xy[:, 0] - center[0]
    py = grid.xy[:, 1] - center[1]
    r = np.hypot(px, py)
    keep = r > grid.h
    return r[keep], (px[keep] * gx[keep] + py[keep] * gy[keep]) / r[keep]


def radial_monotonicity_2d(u, center=(0.0, 0.0), tol_mono=None) -> CheckVerdict:
    """PASS iff ∂u/∂r ≥ −tol_mono at every interior node with r > h.

    Default ``tol_mono = max(1e-8, 10 h² max|u''|)``.
    """
    grid = u.grid
    x_min, x_max, y_min, y_max = grid.domain.bounding_box
    if not (x_min <= center[0] <= x_max and y_min <= center[1] <= y_max):
        raise CenterOutsideDomain(f"center {center} lies outside the domain's bounding box")
    if tol_mono is None:
        tol_mono = max(1e-8, 10 * grid.h ** 2 * second_derivative_scale(u))
    r, dudr = radial_derivative_2d(u, center)
    if len(dudr) == 0:
        raise ValueError("no interior node with r > h")
    k = int(np.argmin(dudr))
    return CheckVerdict.inequality(
        "monotonicity", -float(dudr[k]), 0.0, tol_mono,
        details=f"min du/dr = {dudr[k]:.3e} at r = {r[k]:.4g}")


def gradient_bound(u_val, r):
    """2r e⁻ᵘ / (eᵘ + r² e⁻ᵘ), the admissible |∇u| at an interior maximum of |∇u|²."""
    return 2 * r * np.exp(-u_val) / (np.exp(u_val) + r * r * np.exp(-u_val))


def gradient_bound_check(u, eps, g=None, tol_disc=None) -> CheckVerdict:
    """Stationary-point inequality at the maximum of the discrete |∇u|².

    At an interior maximum of |∇u|² the equation forces

        (eᵘ + r² e⁻ᵘ) |∇u|² ≤ e⁻ᵘ |∇r²| |∇u|,   i.e.  |∇u| ≤ 2r e⁻ᵘ / (eᵘ + r² e⁻ᵘ).

    When the maximising node touches the boundary the verdict is BOUNDARY_MAX
    (passed): the interior inequality does not apply there, and the report
    compares sup|∇u| with the largest tangential derivative of ``g`` for
    information only.
    """
    grid = u.grid
    tol = 10.0 * grid.h ** 2 / eps ** 2 if tol_disc is None else float(tol_disc)
    grad = op.gradient(u)
    mag2 = np.sum(grad * grad, axis=1)
    k = int(np.argmax(mag2))
    gnorm = float(np.sqrt(mag2[k]))
    if gnorm == 0.0:
        return CheckVerdict("lemma2", True, 0.0, 0.0, tol, "grad u vanishes", PASS)
    x, y = grid.xy[k]
    if grid.near_boundary[k]:
        tang = 0.0
        bp = grid.boundary_point_list()
        if g is not None and len(bp):
            n = grid.domain.normal(bp[:, 0], bp[:, 1])
            dg = g.gradient(bp[:, 0], bp[:, 1])
            tang = float(np.max(np.abs(-n[:, 1] * dg[:, 0] + n[:, 0] * dg[:, 1])))
        return CheckVerdict(
            "lemma2", True, gnorm, tang, tol,
            f"max |grad u| = {gnorm:.6g} at boundary-adjacent node ({x:.4g}, {y:.4g}); "
            f"max tangential |grad g| = {tang:.6g}", BOUNDARY_MAX)
    uk = u.values[k]
    r = float(np.hypot(x, y))
    bound = gradient_bound(uk, r)
    return CheckVerdict.inequality(
        "lemma2", gnorm, float(bound), tol,
        details=f"interior max |grad u| = {gnorm:.6g} at ({x:.4g}, {y:.4g}), bound {bound:.6g}")
