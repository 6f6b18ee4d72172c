"""Dirichlet data ``g`` on the domain boundary."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, LogAtOrigin


class Boundary:
    """Callable ``g(x, y)``, vectorised over numpy arrays."""

    #: True when g depends on the polar radius about the origin only
    radial = False

    def __call__(self, x, y):
        raise NotImplementedError

    def gradient(self, x, y):
        """Gradient of the natural extension of g to the plane, shape (..., 2)."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(Boundary):
    radial = True

    def __call__(self, x, y):
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def gradient(self, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.zeros(shape + (2,))

    def to_dict(self):
        return {"type": "zero"}


@dataclass(frozen=True)
class Constant(Boundary):
    c: float = 0.0
    radial = True

    def __post_init__(self):
        if not np.isfinite(self.c):
            raise ConfigError("boundary.c", "must be finite")

    def __call__(self, x, y):
        return np.full(np.broadcast(np.asarray(x), np.asarray(y)).shape, float(self.c))

    def gradient(self, x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.zeros(shape + (2,))

    def to_dict(self):
        return {"type": "constant", "c": self.c}


@dataclass(frozen=True)
class LogR(Boundary):
    """g = log r = 0.5 log(x^2 + y^2); exact solution of the PDE off the origin."""

    radial = True

    def __call__(self, x, y):
        r2 = np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2
        if np.any(r2 == 0.0):
            raise LogAtOrigin("log_r boundary data evaluated at the origin")
        return 0.5 * np.log(r2)

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = x * x + y * y
        if np.any(r2 == 0.0):
            raise LogAtOrigin("log_r gradient evaluated at the origin")
        return np.stack([x / r2, y / r2], axis=-1)

    def to_dict(self):
        return {"type": "log_r"}


@dataclass(frozen=True)
class Fourier(Boundary):
    """g = a0 + sum_k a_k cos(k t) + b_k sin(k t), t the polar angle, k = 1..K."""

    a0: float = 0.0
    a: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if not all(np.isfinite((self.a0,) + a + b)):
            raise ConfigError("boundary", "fourier coefficients must be finite")
        k = max(len(a), len(b))
        object.__setattr__(self, "a", a + (0.0,) * (k - len(a)))
        object.__setattr__(self, "b", b + (0.0,) * (k - len(b)))

    @property
    def radial(self):
        return not any(self.a) and not any(self.b)

    def __call__(self, x, y):
        t = np.arctan2(np.asarray(y, dtype=float), np.asarray(x, dtype=float))
        out = np.full(t.shape, float(self.a0))
        for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
            out = out + ak * np.cos(k * t) + bk * np.sin(k * t)
        return out

    def gradient(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.arctan2(y, x)
        r2 = x * x + y * y
        dg_dt = np.zeros(t.shape)
        for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
            dg_dt = dg_dt + k * (-ak * np.sin(k * t) + bk * np.cos(k * t))
        # grad t = (-y, x) / r^2
        r2 = np.where(r2 > 0, r2, np.inf)
        return np.stack([-y * dg_dt / r2, x * dg_dt / r2], axis=-1)

    def to_dict(self):
        return {"type": "fourier", "a0": self.a0, "a": list(self.a), "b": list(self.b)}


def eval_boundary(g, p):
    """Value of ``g`` at a single point ``p = (x, y)``."""
    return float(g(np.float64(p[0]), np.float64(p[1])))
