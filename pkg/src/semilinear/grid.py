"""Cartesian lattice over a domain, with embedded-boundary arm fractions.

The lattice is anchored at the lower-left corner of the domain's bounding box.
A node is interior when it lies strictly inside the domain.  For each interior
node and each direction (E, W, N, S) we record the fraction ``theta`` of ``h``
to the next interior node (1) or to the boundary crossing (0 < theta <= 1).

Arms shorter than ``THETA_MIN * h`` are not allowed: such a node is demoted to a
boundary node that carries the Dirichlet value at its own position, and the
classification is recomputed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ConfigError, DisconnectedInterior, EmptyInterior, ThinFeature
from .geometry import Domain

THETA_MIN = 1e-6

#: (axis, sign) per arm, in the order E, W, N, S
DIRECTIONS = ((0, 1), (0, -1), (1, 1), (1, -1))
_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True, eq=False)
class Grid:
    """Interior nodes of a lattice plus their boundary-arm geometry.

    Attributes
    ----------
    domain : Domain
    h : float
    anchor : (float, float)
        Bounding-box lower-left corner; lattice node (i, j) sits at
        ``anchor + (i - 1, j - 1) * h`` (index 0 is a padding ring).
    shape : (int, int)
        Lattice size as (nx, ny).
    ij : int array (n, 2)
        Lattice indices (i along x, j along y) of the interior nodes.
    xy : float array (n, 2)
    index : int array (nx, ny)
        Unknown number at each lattice node, -1 when not interior.
    neighbors : int array (n, 4)
        Unknown number of the E, W, N, S neighbour, -1 for a boundary arm.
    theta : float array (n, 4)
    bpoints : float array (n, 4, 2)
        Boundary point hit by each boundary arm (NaN on interior arms).
    snapped : int array (m, 2)
        Lattice indices demoted to boundary nodes by the degenerate-arm rule.
    """

    domain: Domain
    h: float
    anchor: tuple
    shape: tuple
    ij: np.ndarray = field(repr=False)
    xy: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    neighbors: np.ndarray = field(repr=False)
    theta: np.ndarray = field(repr=False)
    bpoints: np.ndarray = field(repr=False)
    snapped: np.ndarray = field(repr=False)

    @property
    def n(self):
        return len(self.xy)

    @property
    def boundary_arms(self):
        """Boolean (n, 4) mask of arms that end on the boundary."""
        return self.neighbors < 0

    @property
    def is_aligned(self):
        """True when every arm has full length, so the Laplacian is symmetric."""
        return bool(np.all(self.theta == 1.0))

    @property
    def near_boundary(self):
        """Nodes with at least one boundary arm."""
        return self.boundary_arms.any(axis=1)

    def boundary_point_list(self):
        """Distinct boundary points, shape (m, 2)."""
        pts = self.bpoints[self.boundary_arms]
        return np.unique(pts, axis=0) if len(pts) else pts.reshape(0, 2)

    def lattice_coords(self, i, j):
        return (self.anchor[0] + (np.asarray(i) - 1) * self.h,
                self.anchor[1] + (np.asarray(j) - 1) * self.h)

    def summary(self):
        return {
            "h": self.h,
            "n_interior": self.n,
            "lattice_shape": list(self.shape),
            "n_snapped": int(len(self.snapped)),
            "min_theta": float(self.theta.min()),
            "aligned": self.is_aligned,
        }


def _lattice(domain, h):
    x_min, x_max, y_min, y_max = domain.bounding_box
    nx = int(np.ceil((x_max - x_min) / h - 1e-9)) + 1
    ny = int(np.ceil((y_max - y_min) / h - 1e-9)) + 1
    # Pad by one node so every interior node has all four lattice neighbours.
    nx += 2
    ny += 2
    xs = x_min + (np.arange(nx) - 1) * h
    ys = y_min + (np.arange(ny) - 1) * h
    return (x_min, y_min), xs, ys


def build_grid(domain: Domain, h: float) -> Grid:
    """Classify lattice nodes and compute Shortley-Weller arm geometry.

    Raises
    ------
    EmptyInterior, DisconnectedInterior, ThinFeature
    """
    h = float(h)
    if not (np.isfinite(h) and h > 0):
        raise ConfigError("h", f"must be > 0 (got {h})")
    anchor, xs, ys = _lattice(domain, h)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    inside = np.asarray(domain.contains(X, Y), dtype=bool)
    # The padded outer ring is never interior.
    inside[[0, -1], :] = False
    inside[:, [0, -1]] = False
    snapped = np.zeros_like(inside)

    for _ in range(16):
        if not inside.any():
            raise EmptyInterior(f"no lattice node of spacing {h} lies inside the domain")
        ij = np.argwhere(inside)
        index = -np.ones(inside.shape, dtype=np.int64)
        index[ij[:, 0], ij[:, 1]] = np.arange(len(ij))
        xy = np.column_stack([X[ij[:, 0], ij[:, 1]], Y[ij[:, 0], ij[:, 1]]])

        n = len(ij)
        neighbors = np.empty((n, 4), dtype=np.int64)
        theta = np.ones((n, 4))
        bpoints = np.full((n, 4, 2), np.nan)
        for d, ((axis, sign), (di, dj)) in enumerate(zip(DIRECTIONS, _OFFSETS)):
            ni, nj = ij[:, 0] + di, ij[:, 1] + dj
            nb = index[ni, nj]
            neighbors[:, d] = nb
            arm = nb < 0
            if not arm.any():
                continue
            on_lattice = arm & snapped[ni, nj]
            cut = arm & ~on_lattice
            t = np.full(n, h)
            if cut.any():
                t[cut] = domain.arm_length(xy[cut, 0], xy[cut, 1], axis, sign, h)
            frac = t[arm] / h
            # crossings within rounding of the next lattice node sit on it
            theta[arm, d] = np.where(frac > 1.0 - 1e-9, 1.0, frac)
            t[arm] = theta[arm, d] * h
            step = np.zeros(2)
            step[axis] = sign
            bpoints[arm, d] = xy[arm] + t[arm, None] * step
            # Full arms end exactly on the neighbouring lattice node.
            full = arm & (theta[:, d] == 1.0)
            bpoints[full, d] = np.column_stack([X[ni[full], nj[full]], Y[ni[full], nj[full]]])

        short = (theta < THETA_MIN).any(axis=1)
        if not short.any():
            break
        bad = ij[short]
        inside[bad[:, 0], bad[:, 1]] = False
        snapped[bad[:, 0], bad[:, 1]] = True
    else:
        raise ThinFeature("degenerate-arm snapping did not settle")

    if theta.min() < THETA_MIN:
        raise ThinFeature(f"arm fraction {theta.min():.3g} below {THETA_MIN}")

    _, n_comp = ndimage.label(inside)
    if n_comp != 1:
        raise DisconnectedInterior(f"interior splits into {n_comp} components at h={h}")

    return Grid(
        domain=domain,
        h=h,
        anchor=anchor,
        shape=inside.shape,
        ij=ij,
        xy=xy,
        index=index,
        neighbors=neighbors,
        theta=theta,
        bpoints=bpoints,
        snapped=np.argwhere(snapped),
    )
