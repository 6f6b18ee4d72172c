"""Finite-difference solver for  Δu = ε⁻²(eᵘ − r²e⁻ᵘ)  on planar domains."""
from .barrier import BarrierResult, check_lemma1, solve_barrier
from .boundary import Constant, Fourier, LogR, Zero
from .diagnostics import (CheckVerdict, angular_asymmetry, gradient_bound_check,
                          moving_plane_check, radial_monotonicity_2d)
from .errors import SemilinearError
from .geometry import Annulus, Disk, Implicit, Rectangle
from .grid import Grid, build_grid
from .nonlinear import SolverConfig, SolveReport, continuation_solve, newton_solve
from .operator import Field, assemble_laplacian, jacobian, residual
from .radial import RadialProblem, radial_solve

__version__ = "0.1.0"

__all__ = [
    "Annulus", "BarrierResult", "CheckVerdict", "Constant", "Disk", "Field", "Fourier", "Grid",
    "Implicit", "LogR", "RadialProblem", "Rectangle", "SemilinearError", "SolveReport",
    "SolverConfig", "Zero", "angular_asymmetry", "assemble_laplacian", "build_grid",
    "check_lemma1", "continuation_solve", "gradient_bound_check", "jacobian",
    "moving_plane_check", "newton_solve", "radial_monotonicity_2d", "radial_solve", "residual",
    "solve_barrier",
]
