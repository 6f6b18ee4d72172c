"""Planar domains described by a signed-distance-like function.

Every domain exposes the same small surface: ``sdf`` (negative strictly
inside), ``bounding_box``, ``arm_length`` (distance along an axis to the first
boundary crossing) and ``normal``.  The named shapes answer ``arm_length`` in
closed form; :class:`Implicit` falls back to bisection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError

BISECTION_STEPS = 48


def _as_point(p, name):
    p = tuple(float(v) for v in p)
    if len(p) != 2 or not all(np.isfinite(p)):
        raise ConfigError(name, f"expected a finite (x, y) pair, got {p!r}")
    return p


def _circle_hits(x, y, dx, dy, cx, cy, radius):
    """Positive parameters t where the ray (x, y) + t (dx, dy) meets a circle.

    ``dx, dy`` is an axis unit vector.  Returns two arrays (near, far) with
    ``inf`` where the corresponding root is missing or non-positive.
    """
    px, py = x - cx, y - cy
    b = px * dx + py * dy
    c = px * px + py * py - radius * radius
    disc = b * b - c
    ok = disc >= 0.0
    s = np.sqrt(np.where(ok, disc, 0.0))
    t1 = np.where(ok, -b - s, np.inf)
    t2 = np.where(ok, -b + s, np.inf)
    t1 = np.where(t1 > 0.0, t1, np.inf)
    t2 = np.where(t2 > 0.0, t2, np.inf)
    return t1, t2


class Domain:
    """Common behaviour; subclasses provide ``sdf`` and ``bounding_box``."""

    #: rotation centre for rotation-invariant shapes, else None
    center = None

    def sdf(self, x, y):
        raise NotImplementedError

    @property
    def bounding_box(self):
        raise NotImplementedError

    def contains(self, x, y):
        return self.sdf(x, y) < 0.0

    def arm_length(self, x, y, axis, sign, h):
        """Distance from interior points to the boundary along ``sign * e_axis``.

        Only called for arms whose lattice neighbour is not interior, so a
        crossing exists in ``(0, h]``; the result is clipped to that range.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lo = np.zeros_like(x)
        hi = np.full_like(x, float(h))
        dx, dy = (sign, 0.0) if axis == 0 else (0.0, sign)
        for _ in range(BISECTION_STEPS):
            mid = 0.5 * (lo + hi)
            inside = self.sdf(x + mid * dx, y + mid * dy) < 0.0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return hi

    def normal(self, x, y):
        """Outward unit normal from a central-difference gradient of ``sdf``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        bb = self.bounding_box
        d = 1e-6 * max(bb[1] - bb[0], bb[3] - bb[2])
        gx = (self.sdf(x + d, y) - self.sdf(x - d, y)) / (2 * d)
        gy = (self.sdf(x, y + d) - self.sdf(x, y - d)) / (2 * d)
        norm = np.hypot(gx, gy)
        norm = np.where(norm > 0, norm, 1.0)
        return np.stack([gx / norm, gy / norm], axis=-1)

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Rectangle(Domain):
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(np.isfinite(vals)):
            raise ConfigError("domain", "rectangle bounds must be finite")
        if not self.x_min < self.x_max:
            raise ConfigError("domain.x_max", "x_min < x_max required")
        if not self.y_min < self.y_max:
            raise ConfigError("domain.y_max", "y_min < y_max required")

    def sdf(self, x, y):
        return np.maximum(
            np.maximum(self.x_min - x, x - self.x_max),
            np.maximum(self.y_min - y, y - self.y_max),
        )

    @property
    def bounding_box(self):
        return (self.x_min, self.x_max, self.y_min, self.y_max)

    def arm_length(self, x, y, axis, sign, h):
        if axis == 0:
            t = (self.x_max - x) if sign > 0 else (x - self.x_min)
        else:
            t = (self.y_max - y) if sign > 0 else (y - self.y_min)
        return np.clip(t, 0.0, h)

    def normal(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = np.stack([self.x_min - x, x - self.x_max, self.y_min - y, y - self.y_max])
        k = np.argmax(d, axis=0)
        nx = np.select([k == 0, k == 1], [-1.0, 1.0], 0.0)
        ny = np.select([k == 2, k == 3], [-1.0, 1.0], 0.0)
        return np.stack([nx, ny], axis=-1)

    def to_dict(self):
        return {"type": "rectangle", "x_min": self.x_min, "x_max": self.x_max,
                "y_min": self.y_min, "y_max": self.y_max}


@dataclass(frozen=True)
class Disk(Domain):
    center: tuple = (0.0, 0.0)
    R: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center, "domain.center"))
        if not (np.isfinite(self.R) and self.R > 0):
            raise ConfigError("domain.R", f"radius must be > 0 (got {self.R})")

    def sdf(self, x, y):
        return np.hypot(x - self.center[0], y - self.center[1]) - self.R

    def contains(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        return dx * dx + dy * dy < self.R * self.R

    @property
    def bounding_box(self):
        cx, cy = self.center
        return (cx - self.R, cx + self.R, cy - self.R, cy + self.R)

    def arm_length(self, x, y, axis, sign, h):
        dx, dy = (sign, 0.0) if axis == 0 else (0.0, sign)
        _, t = _circle_hits(x, y, dx, dy, *self.center, self.R)
        return np.clip(np.where(np.isfinite(t), t, h), 0.0, h)

    def normal(self, x, y):
        px = np.asarray(x, dtype=float) - self.center[0]
        py = np.asarray(y, dtype=float) - self.center[1]
        r = np.hypot(px, py)
        r = np.where(r > 0, r, 1.0)
        return np.stack([px / r, py / r], axis=-1)

    def to_dict(self):
        return {"type": "disk", "center": list(self.center), "R": self.R}


@dataclass(frozen=True)
class Annulus(Domain):
    center: tuple = (0.0, 0.0)
    r_in: float = 1.0
    r_out: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "center", _as_point(self.center, "domain.center"))
        if not (np.isfinite(self.r_in) and self.r_in > 0):
            raise ConfigError("domain.r_in", f"must be > 0 (got {self.r_in})")
        if not (np.isfinite(self.r_out) and self.r_out > self.r_in):
            raise ConfigError("domain.r_out", f"must exceed r_in (got {self.r_out})")

    def sdf(self, x, y):
        r = np.hypot(x - self.center[0], y - self.center[1])
        return np.maximum(r - self.r_out, self.r_in - r)

    def contains(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        r2 = dx * dx + dy * dy
        return (r2 < self.r_out * self.r_out) & (r2 > self.r_in * self.r_in)

    @property
    def bounding_box(self):
        cx, cy = self.center
        return (cx - self.r_out, cx + self.r_out, cy - self.r_out, cy + self.r_out)

    def arm_length(self, x, y, axis, sign, h):
        dx, dy = (sign, 0.0) if axis == 0 else (0.0, sign)
        _, t_out = _circle_hits(x, y, dx, dy, *self.center, self.r_out)
        t_in, _ = _circle_hits(x, y, dx, dy, *self.center, self.r_in)
        t = np.minimum(t_out, t_in)
        return np.clip(np.where(np.isfinite(t), t, h), 0.0, h)

    def normal(self, x, y):
        px = np.asarray(x, dtype=float) - self.center[0]
        py = np.asarray(y, dtype=float) - self.center[1]
        r = np.hypot(px, py)
        sgn = np.where(r > 0.5 * (self.r_in + self.r_out), 1.0, -1.0)
        r = np.where(r > 0, r, 1.0)
        return np.stack([sgn * px / r, sgn * py / r], axis=-1)

    def to_dict(self):
        return {"type": "annulus", "center": list(self.center),
                "r_in": self.r_in, "r_out": self.r_out}


@dataclass(frozen=True)
class Implicit(Domain):
    """Region ``{sdf < 0}`` clipped to nothing; the box must enclose ``sdf = 0``.

    Smoothness of the zero level set is the caller's responsibility.
    """

    func: Callable = field(repr=False)
    box: tuple = (-1.0, 1.0, -1.0, 1.0)
    expression: str | None = None

    def __post_init__(self):
        box = tuple(float(v) for v in self.box)
        if len(box) != 4 or not all(np.isfinite(box)) or box[0] >= box[1] or box[2] >= box[3]:
            raise ConfigError("domain.bounding_box", f"invalid box {self.box!r}")
        object.__setattr__(self, "box", box)

    def sdf(self, x, y):
        return np.asarray(self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float)),
                          dtype=float)

    @property
    def bounding_box(self):
        return self.box

    def to_dict(self):
        return {"type": "implicit", "sdf": self.expression, "bounding_box": list(self.box)}


def is_rotation_invariant(domain):
    return isinstance(domain, (Disk, Annulus))
