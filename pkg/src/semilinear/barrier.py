"""Linear barrier problem and the sup-norm bound it implies.

Φ solves  ΔΦ = ε⁻² (1 − x² − y²)  with  Φ = g  on the boundary.  Any solution
of the semilinear problem with the same data satisfies  sup|u| ≤ 2 sup|Φ|;
for the σ-scaled problem the barrier is σΦ.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import operator as op
from .diagnostics import CheckVerdict
from .errors import GridMismatch
from .operator import Field
from .sparse import solve_linear


@dataclass(frozen=True)
class BarrierResult:
    phi: Field
    sup_abs_phi: float
    epsilon: float

    @property
    def bound(self):
        return 2.0 * self.sup_abs_phi

    @property
    def grid(self):
        return self.phi.grid

    def default_tol(self):
        """10 ε⁻² h², the discretisation slack for the bound check."""
        return 10.0 * self.grid.h ** 2 / self.epsilon ** 2

    def scaled(self, sigma):
        """Barrier of the σ-problem (data σ g, source σ ε⁻²(1 − r²)) by linearity."""
        phi = Field(self.grid, sigma * self.phi.values,
                    None if self.phi.bvals is None else sigma * self.phi.bvals)
        return BarrierResult(phi, abs(sigma) * self.sup_abs_phi, self.epsilon)


def solve_dirichlet_poisson(grid, g, source, tol=1e-12):
    """Solve Δ_h Φ = source with Φ = g on the boundary; returns a Field.

    ``source`` is an array over the interior nodes.
    """
    st = op.assemble_laplacian(grid)
    bv = op.boundary_values(grid, g)
    rhs = np.asarray(source, dtype=float) - st.boundary_term(bv)
    # Δ_h is negative definite; hand the Krylov solver -Δ_h.
    phi, _ = solve_linear(st.matrix.scaled(-1.0), -rhs, grid.is_aligned, tol=tol)
    return Field(grid, phi, bv)


def solve_barrier(grid, g, eps) -> BarrierResult:
    """Φ for the bound  sup|u| ≤ 2 sup|Φ|.

    The sup runs over interior nodes and boundary points, so boundary data
    enters even where the interior happens to be smaller.
    """
    if not eps > 0:
        raise ValueError(f"epsilon must be > 0 (got {eps})")
    x, y = grid.xy[:, 0], grid.xy[:, 1]
    phi = solve_dirichlet_poisson(grid, g, (1.0 - x * x - y * y) / eps ** 2)
    sup = phi.sup_abs()
    bp = grid.boundary_point_list()
    if len(bp):
        sup = max(sup, float(np.max(np.abs(g(bp[:, 0], bp[:, 1])))))
    return BarrierResult(phi, sup, float(eps))


def check_lemma1(u: Field, barrier: BarrierResult, tol_disc=None) -> CheckVerdict:
    """PASS iff  max|u| ≤ 2 sup|Φ| + tol_disc."""
    if u.grid is not barrier.grid:
        raise GridMismatch("u and the barrier live on different grids")
    tol = barrier.default_tol() if tol_disc is None else float(tol_disc)
    lhs = u.sup_abs()
    rhs = barrier.bound
    return CheckVerdict.inequality(
        "lemma1", lhs, rhs, tol,
        details=f"sup|u| = {lhs:.6g}, 2 sup|Phi| = {rhs:.6g}, slack {tol:.3g}")
