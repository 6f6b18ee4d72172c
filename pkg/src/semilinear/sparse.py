"""CSR storage and preconditioned Krylov solvers (CG, BiCGSTAB)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (Breakdown, DimensionMismatch, IndefiniteBreakdown,
                     NotConverged)

DEFAULT_TOL = 1e-10


class CSRMatrix:
    """Square matrix in compressed sparse row layout.

    Column indices are strictly increasing within each row; duplicates are
    summed by :meth:`from_coo`.
    """

    def __init__(self, n, indptr, indices, data):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.data = np.ascontiguousarray(data, dtype=float)
        self._check()
        self._rows = np.repeat(np.arange(self.n), np.diff(self.indptr))

    def _check(self):
        n, p, c = self.n, self.indptr, self.indices
        if len(p) != n + 1 or p[0] != 0 or p[-1] != len(c) or len(c) != len(self.data):
            raise ValueError("inconsistent CSR arrays")
        if np.any(np.diff(p) < 0):
            raise ValueError("row offsets must be nondecreasing")
        if len(c) and (c.min() < 0 or c.max() >= n):
            raise ValueError("column index out of range")
        rows = np.repeat(np.arange(n), np.diff(p))
        same_row = rows[1:] == rows[:-1]
        if np.any(same_row & (np.diff(c) <= 0)):
            raise ValueError("column indices must be strictly increasing within a row")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("matrix entries must be finite")

    @classmethod
    def from_coo(cls, n, rows, cols, vals):
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if len(rows):
            new = np.ones(len(rows), dtype=bool)
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(new)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        return cls(n, np.cumsum(indptr), cols, vals)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=float)
        rows, cols = np.nonzero(a)
        return cls.from_coo(a.shape[0], rows, cols, a[rows, cols])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n)
        return cls(n, np.arange(n + 1), idx, np.ones(n))

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self):
        return len(self.data)

    def diagonal(self):
        d = np.zeros(self.n)
        on = self.indices == self._rows
        d[self._rows[on]] = self.data[on]
        return d

    def matvec(self, x):
        return spmv(self, x)

    __matmul__ = matvec

    def abs_matvec(self, x):
        """|A| |x|, used for rounding-error estimates."""
        return np.bincount(self._rows, weights=np.abs(self.data) * np.abs(x[self.indices]),
                           minlength=self.n)

    def scaled(self, alpha):
        return CSRMatrix(self.n, self.indptr, self.indices, alpha * self.data)

    def add_diagonal(self, d):
        d = np.broadcast_to(np.asarray(d, dtype=float), (self.n,))
        idx = np.arange(self.n)
        rows = np.concatenate([self._rows, idx])
        cols = np.concatenate([self.indices, idx])
        vals = np.concatenate([self.data, d])
        return CSRMatrix.from_coo(self.n, rows, cols, vals)

    def transpose(self):
        return CSRMatrix.from_coo(self.n, self.indices, self._rows, self.data)

    def is_symmetric(self, rtol=0.0):
        t = self.transpose()
        if not (np.array_equal(t.indptr, self.indptr) and np.array_equal(t.indices, self.indices)):
            return False
        scale = np.max(np.abs(self.data)) if self.nnz else 0.0
        return bool(np.all(np.abs(t.data - self.data) <= rtol * scale))

    def to_dense(self):
        a = np.zeros((self.n, self.n))
        a[self._rows, self.indices] = self.data
        return a


def spmv(a: CSRMatrix, x) -> np.ndarray:
    """y = A x.  Each row accumulates in storage order, so results are reproducible."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.n,):
        raise DimensionMismatch(f"matrix is {a.n}x{a.n}, vector has shape {x.shape}")
    return np.bincount(a._rows, weights=a.data * x[a.indices], minlength=a.n)


@dataclass
class LinearSolveStats:
    method: str
    iterations: int = 0
    relative_residual: float = 0.0
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"method": self.method, "iterations": self.iterations,
                "relative_residual": self.relative_residual}


def _jacobi(a, precond):
    if precond in (None, "none"):
        return None
    if precond != "jacobi":
        raise ValueError(f"unknown preconditioner {precond!r}")
    d = a.diagonal()
    if np.any(d == 0):
        raise ValueError("Jacobi preconditioner needs a zero-free diagonal")
    return 1.0 / d


def _prepare(a, b, max_iter):
    b = np.asarray(b, dtype=float)
    if b.shape != (a.n,):
        raise DimensionMismatch(f"matrix is {a.n}x{a.n}, rhs has shape {b.shape}")
    if max_iter is None:
        max_iter = 20 * a.n
    return b, max_iter


def solve_cg(a: CSRMatrix, b, tol=DEFAULT_TOL, max_iter=None, precond="jacobi", x0=None,
             callback=None):
    """Preconditioned conjugate gradients for symmetric positive definite ``a``.

    Stops when the true residual satisfies ``||b - A x|| <= tol ||b||``.
    ``callback(x)``, if given, sees the iterate after every step.

    Raises
    ------
    IndefiniteBreakdown
        A search direction with ``p.A p <= 0`` was met; ``a`` is not SPD.
    NotConverged
        ``max_iter`` iterations did not reach ``tol``.
    """
    b, max_iter = _prepare(a, b, max_iter)
    stats = LinearSolveStats("CG")
    minv = _jacobi(a, precond)
    bnorm = np.linalg.norm(b)
    x = np.zeros(a.n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros(a.n), stats
    target = tol * bnorm
    it = 0
    while True:
        # (re)start from the true residual
        r = b - spmv(a, x)
        rnorm = np.linalg.norm(r)
        stats.history.append(rnorm / bnorm)
        if rnorm <= target:
            break
        if it >= max_iter:
            stats.iterations, stats.relative_residual = it, rnorm / bnorm
            raise NotConverged(f"CG: residual {rnorm / bnorm:.3e} after {it} iterations")
        z = r if minv is None else minv * r
        p = z.copy()
        rz = r @ z
        while it < max_iter:
            q = spmv(a, p)
            pq = p @ q
            if pq <= 0.0:
                raise IndefiniteBreakdown(f"CG: p.Ap = {pq:.3e} at iteration {it}")
            alpha = rz / pq
            x += alpha * p
            r -= alpha * q
            it += 1
            if callback is not None:
                callback(x)
            rnorm = np.linalg.norm(r)
            stats.history.append(rnorm / bnorm)
            if rnorm <= target:
                break
            z = r if minv is None else minv * r
            rz_new = r @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
    stats.iterations, stats.relative_residual = it, rnorm / bnorm
    return x, stats


def solve_bicgstab(a: CSRMatrix, b, tol=DEFAULT_TOL, max_iter=None, precond="jacobi", x0=None):
    """Right-preconditioned BiCGSTAB for general nonsingular ``a``.

    Convergence is confirmed on the true residual; on a recurrence/true
    mismatch or a ``rho ~ 0`` breakdown the iteration restarts from the current
    iterate.  A breakdown right after a restart raises :class:`Breakdown`.
    """
    b, max_iter = _prepare(a, b, max_iter)
    stats = LinearSolveStats("BiCGSTAB")
    minv = _jacobi(a, precond)
    prec = (lambda v: v) if minv is None else (lambda v: minv * v)
    bnorm = np.linalg.norm(b)
    x = np.zeros(a.n) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros(a.n), stats
    target = tol * bnorm
    it = 0
    tiny = np.finfo(float).tiny
    while True:
        r = b - spmv(a, x)
        rnorm = np.linalg.norm(r)
        stats.history.append(rnorm / bnorm)
        if rnorm <= target:
            break
        if it >= max_iter:
            stats.iterations, stats.relative_residual = it, rnorm / bnorm
            raise NotConverged(f"BiCGSTAB: residual {rnorm / bnorm:.3e} after {it} iterations")
        r_hat = r.copy()
        rho = r_hat @ r
        p = r.copy()
        fresh = True
        while it < max_iter:
            if abs(rho) <= 1e-30 * rnorm * np.linalg.norm(r_hat) + tiny:
                if fresh:
                    raise Breakdown(f"BiCGSTAB: rho vanished at iteration {it}")
                break
            ph = prec(p)
            v = spmv(a, ph)
            denom = r_hat @ v
            if denom == 0.0:
                if fresh:
                    raise Breakdown(f"BiCGSTAB: r_hat.v vanished at iteration {it}")
                break
            alpha = rho / denom
            s = r - alpha * v
            it += 1
            fresh = False
            snorm = np.linalg.norm(s)
            if snorm <= target:
                x += alpha * ph
                r = s
                rnorm = snorm
                stats.history.append(rnorm / bnorm)
                break
            sh = prec(s)
            t = spmv(a, sh)
            tt = t @ t
            omega = (t @ s) / tt if tt > 0 else 0.0
            x += alpha * ph + omega * sh
            r = s - omega * t
            rnorm = np.linalg.norm(r)
            stats.history.append(rnorm / bnorm)
            if rnorm <= target or omega == 0.0:
                break
            rho_new = r_hat @ r
            beta = (rho_new / rho) * (alpha / omega)
            p = r + beta * (p - omega * v)
            rho = rho_new
    stats.iterations, stats.relative_residual = it, rnorm / bnorm
    return x, stats


def solve_linear(a: CSRMatrix, b, symmetric, tol=DEFAULT_TOL, max_iter=None):
    """Method selection used by the nonlinear and barrier solvers.

    CG + Jacobi for symmetric matrices (falling back to BiCGSTAB if CG meets an
    indefinite direction), BiCGSTAB + Jacobi otherwise.
    """
    if symmetric:
        try:
            return solve_cg(a, b, tol=tol, max_iter=max_iter, precond="jacobi")
        except IndefiniteBreakdown:
            pass
    return solve_bicgstab(a, b, tol=tol, max_iter=max_iter, precond="jacobi")
