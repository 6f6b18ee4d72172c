"""Discrete operator for  Δu = σ ε⁻² (eᵘ − (x² + y²) e⁻ᵘ),  u = σ g on ∂Ω.

The Laplacian is the Shortley-Weller stencil: along x, a node with arm
fractions θ_W, θ_E uses

    (2/h²) [u_W / (θ_W (θ_W + θ_E)) − u_C / (θ_W θ_E) + u_E / (θ_E (θ_W + θ_E))]

and likewise along y.  A short arm's neighbour value is the Dirichlet value at
the boundary point; its weight moves into ``Stencil.boundary_weights``.
"""
from __future__ import annotations

import weakref
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, Overflow
from .grid import Grid
from .sparse import CSRMatrix

U_GUARD = 700.0

_STENCILS: "weakref.WeakKeyDictionary[Grid, Stencil]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class Field:
    """One value per interior node of ``grid``.

    ``bvals`` optionally carries the Dirichlet value at the end of each boundary
    arm (shape (n, 4), zero on interior arms); the discrete gradient needs it.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)
    bvals: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise GridMismatch(f"field has {v.size} values, grid has {self.grid.n} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)
        if self.bvals is not None:
            b = np.asarray(self.bvals, dtype=float)
            if b.shape != (self.grid.n, 4):
                raise GridMismatch("boundary values must have shape (n, 4)")
            object.__setattr__(self, "bvals", b)

    @classmethod
    def from_function(cls, grid, fn):
        """Sample ``fn(x, y)`` at the nodes and at every boundary point."""
        values = fn(grid.xy[:, 0], grid.xy[:, 1])
        return cls(grid, np.broadcast_to(values, (grid.n,)).copy(),
                   sample_boundary(grid, fn))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n), np.zeros((grid.n, 4)))

    def sup_abs(self):
        return float(np.max(np.abs(self.values)))

    def check_same_grid(self, other):
        if other.grid is not self.grid:
            raise GridMismatch("fields live on different grids")


def sample_boundary(grid, fn, scale=1.0):
    """``scale * fn`` at the end of each boundary arm, zero on interior arms."""
    out = np.zeros((grid.n, 4))
    arms = grid.boundary_arms
    if arms.any():
        pts = grid.bpoints[arms]
        out[arms] = scale * np.asarray(fn(pts[:, 0], pts[:, 1]), dtype=float)
    return out


@dataclass(frozen=True, eq=False)
class Stencil:
    """Discrete Laplacian split into the interior matrix and boundary weights."""

    grid: Grid
    center: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    matrix: CSRMatrix = field(repr=False)

    @property
    def boundary_weights(self):
        return np.where(self.grid.boundary_arms, self.weights, 0.0)

    def boundary_term(self, bvals):
        return np.sum(self.boundary_weights * bvals, axis=1)

    def apply(self, u, bvals):
        """Δ_h u including the boundary contributions ``bvals``."""
        return self.matrix.matvec(u) + self.boundary_term(bvals)


def assemble_laplacian(grid: Grid) -> Stencil:
    """Shortley-Weller weights for every interior node (cached per grid)."""
    cached = _STENCILS.get(grid)
    if cached is not None:
        return cached
    h2 = grid.h * grid.h
    th = grid.theta
    weights = np.empty_like(th)
    center = np.zeros(grid.n)
    for plus, minus in ((0, 1), (2, 3)):
        tp, tm = th[:, plus], th[:, minus]
        weights[:, plus] = 2.0 / (h2 * tp * (tp + tm))
        weights[:, minus] = 2.0 / (h2 * tm * (tp + tm))
        center -= 2.0 / (h2 * tp * tm)

    rows = [np.arange(grid.n)]
    cols = [np.arange(grid.n)]
    vals = [center]
    for d in range(4):
        inner = grid.neighbors[:, d] >= 0
        rows.append(np.flatnonzero(inner))
        cols.append(grid.neighbors[inner, d])
        vals.append(weights[inner, d])
    matrix = CSRMatrix.from_coo(grid.n, np.concatenate(rows), np.concatenate(cols),
                                np.concatenate(vals))
    st = Stencil(grid, center, weights, matrix)
    _STENCILS[grid] = st
    return st


def _guard(u_val):
    if np.any(np.abs(u_val) > U_GUARD):
        raise Overflow(f"|u| = {np.max(np.abs(u_val)):.4g} exceeds {U_GUARD}")


def rhs_f(u_val, x, y, eps):
    """ε⁻² (eᵘ − (x² + y²) e⁻ᵘ), vectorised."""
    _guard(u_val)
    return (np.exp(u_val) - (x * x + y * y) * np.exp(-u_val)) / (eps * eps)


def rhs_fu(u_val, x, y, eps):
    """∂f/∂u = ε⁻² (eᵘ + (x² + y²) e⁻ᵘ) > 0."""
    _guard(u_val)
    return (np.exp(u_val) + (x * x + y * y) * np.exp(-u_val)) / (eps * eps)


def boundary_values(grid, g, sigma=1.0):
    return sample_boundary(grid, g, scale=sigma)


def residual_values(stencil, u, bvals, eps, sigma):
    """Array form of :func:`residual` for callers that reuse a stencil."""
    xy = stencil.grid.xy
    out = stencil.apply(u, bvals)
    if sigma != 0.0:
        out -= sigma * rhs_f(u, xy[:, 0], xy[:, 1], eps)
    return out


def residual_noise(stencil, u, bvals, eps, sigma):
    """Per-row size of the rounding error committed when evaluating the residual."""
    xy = stencil.grid.xy
    mag = stencil.matrix.abs_matvec(u) + np.abs(stencil.boundary_weights * bvals).sum(axis=1)
    if sigma != 0.0:
        mag += sigma * rhs_fu(u, xy[:, 0], xy[:, 1], eps)
    return 32.0 * np.finfo(float).eps * mag


def residual(u: Field, g, eps, sigma=1.0) -> Field:
    """R(u) = Δ_h u − σ f(u), with the boundary contributions taken from σ g."""
    grid = u.grid
    if not 0.0 <= sigma <= 1.0:
        raise ValueError(f"sigma must lie in [0, 1] (got {sigma})")
    st = assemble_laplacian(grid)
    bv = boundary_values(grid, g, sigma)
    return Field(grid, residual_values(st, u.values, bv, eps, sigma))


def jacobian_matrix(stencil, u, eps, sigma):
    xy = stencil.grid.xy
    if sigma == 0.0:
        return stencil.matrix
    return stencil.matrix.add_diagonal(-sigma * rhs_fu(u, xy[:, 0], xy[:, 1], eps))


def jacobian(u: Field, eps, sigma=1.0) -> CSRMatrix:
    """J = Δ_h − σ diag(f_u(u))."""
    return jacobian_matrix(assemble_laplacian(u.grid), u.values, eps, sigma)


def gradient(u: Field) -> np.ndarray:
    """Discrete gradient at interior nodes, shape (n, 2).

    Uses the three-point formula on the (possibly unequal) arms, so nodes next
    to the boundary difference toward the boundary point at distance θh.
    """
    grid = u.grid
    arms = grid.boundary_arms
    if arms.any() and u.bvals is None:
        raise ValueError("field carries no boundary values; gradient needs them")
    nb = np.where(arms, 0, grid.neighbors)
    vals = np.where(arms, u.bvals if u.bvals is not None else 0.0, u.values[nb])
    dist = grid.theta * grid.h
    out = np.empty((grid.n, 2))
    uc = u.values
    for k, (plus, minus) in enumerate(((0, 1), (2, 3))):
        a, b = dist[:, plus], dist[:, minus]
        up, um = vals[:, plus], vals[:, minus]
        out[:, k] = (b * b * (up - uc) + a * a * (uc - um)) / (a * b * (a + b))
    return out
