"""Finite-difference experiments for maximum principles and boundary slopes.

Grids assemble the operator ``sum a_ij u_ij + sum b_i u_i + c u`` as a
sparse matrix whose rows at boundary nodes are zero. Second derivatives use
three-point stencils (non-uniform where graded), first derivatives central
differences, and mixed derivatives the product of central differences, which
is the symmetric four-point cross stencil.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import gmres, spsolve

from .domains import as_points
from .errors import DomainError, SolverError

CONSTANT_RTOL = 1e-12


# -- 1-D stencils -----------------------------------------------------------

def graded_nodes(a, b, N, q=1.0):
    """``N + 1`` nodes on ``[a, b]`` whose spacings shrink by ``q`` from ``a`` toward ``b``."""
    if N < 2:
        raise ValueError("need at least two cells")
    if not 0 < q <= 1:
        raise ValueError("grading ratio must lie in (0, 1]")
    steps = q ** np.arange(N)
    x = a + (b - a) * np.concatenate([[0.0], np.cumsum(steps)]) / steps.sum()
    x[-1] = b
    return x


def diff_matrices(x):
    """First and second derivative matrices on nodes ``x``; end rows are zero."""
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    s = hm + hp
    rows = np.arange(1, len(x) - 1)
    shape = (len(x), len(x))

    def tri(lo, mid, hi):
        return sp.csr_matrix((np.concatenate([lo, mid, hi]),
                              (np.tile(rows, 3), np.concatenate([rows - 1, rows, rows + 1]))), shape=shape)

    D1 = tri(-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s))
    D2 = tri(2 / (hm * s), -2 / (hm * hp), 2 / (hp * s))
    return D1, D2


def periodic_matrices(N, period=2 * math.pi):
    d = period / N
    e = np.ones(N)
    D1 = sp.diags([-e[:-1], e[:-1]], [-1, 1], shape=(N, N), format="lil")
    D1[0, N - 1], D1[N - 1, 0] = -1, 1
    D2 = sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], shape=(N, N), format="lil")
    D2[0, N - 1] = D2[N - 1, 0] = 1
    return D1.tocsr() / (2 * d), D2.tocsr() / d**2


# -- grids ------------------------------------------------------------------

class Grid:
    """Common interface: ``points`` (M, n), ``boundary`` (M,) and operator assembly."""

    n: int
    points: np.ndarray
    boundary: np.ndarray

    @property
    def interior(self):
        return ~self.boundary

    def operator_matrix(self, coeffs):
        raise NotImplementedError

    def interpolate(self, values, X):
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class TensorGrid(Grid):
    """Tensor product of per-axis node vectors (an interval when ``n == 1``)."""

    def __init__(self, axes, kind="rectangle"):
        self.axes = [np.asarray(a, dtype=float) for a in axes]
        self.kind = kind
        self.n = len(self.axes)
        self.shape = tuple(len(a) for a in self.axes)
        mesh = np.meshgrid(*self.axes, indexing="ij")
        self.points = np.stack([m.ravel() for m in mesh], axis=1)
        edge = np.zeros(self.shape, dtype=bool)
        for k in range(self.n):
            idx = [slice(None)] * self.n
            idx[k] = [0, -1]
            edge[tuple(idx)] = True
        self.boundary = edge.ravel()
        self._ops = [diff_matrices(a) for a in self.axes]

    def _axis_op(self, k, D):
        mats = [sp.identity(len(a), format="csr") for a in self.axes]
        mats[k] = D
        out = mats[0]
        for m in mats[1:]:
            out = sp.kron(out, m, format="csr")
        return out

    def derivative_ops(self):
        first = [self._axis_op(k, self._ops[k][0]) for k in range(self.n)]
        second = [self._axis_op(k, self._ops[k][1]) for k in range(self.n)]
        return first, second

    def operator_matrix(self, coeffs):
        inner = self.interior
        A, b, c = coeffs.evaluate(self.points[inner])
        first, second = self.derivative_ops()
        M = self.points.shape[0]

        def on_interior(vals):
            full = np.zeros(M)
            full[inner] = vals
            return sp.diags(full)

        L = on_interior(c)
        for i in range(self.n):
            L = L + on_interior(A[:, i, i]) @ second[i] + on_interior(b[:, i]) @ first[i]
            for j in range(i + 1, self.n):
                L = L + on_interior(2 * A[:, i, j]) @ (first[i] @ first[j])
        return L.tocsr()

    def interpolate(self, values, X):
        X = as_points(X, self.n)
        f = RegularGridInterpolator(self.axes, np.asarray(values).reshape(self.shape), method="linear")
        return f(X)

    def to_json(self):
        return {"kind": self.kind, "axes": [[float(a[0]), float(a[-1]), len(a) - 1] for a in self.axes]}


def interval_grid(a, b, N, q=1.0):
    return TensorGrid([graded_nodes(a, b, N, q)], kind="interval")


def rectangle_grid(lo, hi, cells):
    return TensorGrid([np.linspace(l, h, c + 1) for l, h, c in zip(lo, hi, cells)])


class PolarAnnulus(Grid):
    """Annulus ``R - eps <= r <= R`` in polar coordinates.

    Radial spacings shrink by the ratio ``q`` toward the outer circle, where
    singular coefficients live. Nodes are ordered radius-major.
    """

    def __init__(self, R, eps, Nr, Nt, q=0.9, center=(0.0, 0.0)):
        if not 0 < eps < R:
            raise ValueError("need 0 < eps < R")
        self.R, self.eps, self.q = float(R), float(eps), float(q)
        self.center = np.asarray(center, dtype=float)
        self.n = 2
        self.r = graded_nodes(R - eps, R, Nr, q)
        self.theta = 2 * math.pi * np.arange(Nt) / Nt
        self.shape = (Nr + 1, Nt)
        rr, tt = np.meshgrid(self.r, self.theta, indexing="ij")
        self.rr, self.tt = rr.ravel(), tt.ravel()
        self.points = self.center + np.column_stack([self.rr * np.cos(self.tt), self.rr * np.sin(self.tt)])
        self.boundary = np.zeros(self.shape, dtype=bool)
        self.boundary[[0, -1], :] = True
        self.boundary = self.boundary.ravel()
        Dr, Drr = diff_matrices(self.r)
        Dt, Dtt = periodic_matrices(Nt)
        It, Ir = sp.identity(Nt, format="csr"), sp.identity(Nr + 1, format="csr")
        self._Dr, self._Drr = sp.kron(Dr, It, format="csr"), sp.kron(Drr, It, format="csr")
        self._Dt, self._Dtt = sp.kron(Ir, Dt, format="csr"), sp.kron(Ir, Dtt, format="csr")
        self._Drt = sp.kron(Dr, Dt, format="csr")

    @property
    def outer(self):
        return self.rr == self.R

    def operator_matrix(self, coeffs):
        inner = self.interior
        A, b, c = coeffs.evaluate(self.points[inner])
        r, t = self.rr[inner], self.tt[inner]
        er = np.column_stack([np.cos(t), np.sin(t)])
        et = np.column_stack([-np.sin(t), np.cos(t)])
        a_rr = np.einsum("ni,nij,nj->n", er, A, er)
        a_rt = np.einsum("ni,nij,nj->n", er, A, et)
        a_tt = np.einsum("ni,nij,nj->n", et, A, et)
        b_r = np.einsum("ni,ni->n", b, er)
        b_t = np.einsum("ni,ni->n", b, et)
        M = self.points.shape[0]

        def D(vals):
            full = np.zeros(M)
            full[inner] = vals
            return sp.diags(full)

        L = (D(a_rr) @ self._Drr + D(2 * a_rt / r) @ self._Drt + D(a_tt / r**2) @ self._Dtt
             + D(a_tt / r + b_r) @ self._Dr + D(b_t / r - 2 * a_rt / r**2) @ self._Dt + D(c))
        return L.tocsr()

    def interpolate(self, values, X):
        X = as_points(X, 2)
        rel = X - self.center
        r = np.linalg.norm(rel, axis=1)
        t = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2 * math.pi)
        V = np.asarray(values).reshape(self.shape)
        V = np.concatenate([V, V[:, :1]], axis=1)
        tt = np.concatenate([self.theta, [2 * math.pi]])
        tol = 1e-12 * self.R
        if np.any(r < self.r[0] - tol) or np.any(r > self.R + tol):
            raise DomainError("interpolation point outside the annulus")
        f = RegularGridInterpolator((self.r, tt), V, method="linear")
        return f(np.column_stack([np.clip(r, self.r[0], self.R), t]))

    def to_json(self):
        return {"kind": "annulus", "R": self.R, "eps": self.eps, "Nr": self.shape[0] - 1,
                "Nt": self.shape[1], "q": self.q, "center": self.center.tolist()}


# -- fields -----------------------------------------------------------------

@dataclass
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.points.shape[0],):
            raise ValueError("one value per grid node expected")

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.points))

    def interpolate(self, X):
        return self.grid.interpolate(self.values, X)

    def to_csv(self, path):
        cols = [f"x{i + 1}" for i in range(self.grid.n)] + ["value", "boundary"]
        data = np.column_stack([self.grid.points, self.values, self.grid.boundary.astype(float)])
        np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="", fmt="%.17g")


def apply_operator(coeffs, field: Field):
    """``L_h[u]`` at interior nodes; boundary entries are NaN."""
    if not np.all(np.isfinite(field.values)):
        raise DomainError("field has non-finite values")
    out = field.grid.operator_matrix(coeffs) @ field.values
    out[field.grid.boundary] = np.nan
    return Field(field.grid, out)


def solve_dirichlet(coeffs, grid: Grid, boundary_data, rhs=0.0, tol=1e-10, maxiter=2000):
    """Solve ``L_h u = rhs`` at interior nodes with ``u = boundary_data`` on the boundary.

    ``boundary_data`` and ``rhs`` are constants, arrays over all nodes or
    callables on points. Interior ``c`` must be non-positive. A direct sparse
    solve is tried first and GMRES second; the result must satisfy
    ``|L_h u - rhs| <= 1e-8 * scale``, with ``scale`` the largest of 1,
    ``|rhs|`` and ``|diag L_h| |u|``, or :class:`SolverError` is raised.
    """
    inner, bnd = grid.interior, grid.boundary
    _, _, c = coeffs.evaluate(grid.points[inner])
    if np.any(c > 0):
        raise ValueError("solvability guard: c must be non-positive at interior nodes")

    def nodal(data):
        if callable(data):
            return np.asarray(data(grid.points), dtype=float)
        return np.broadcast_to(np.asarray(data, dtype=float), (grid.points.shape[0],)).copy()

    g, f = nodal(boundary_data), nodal(rhs)
    L = grid.operator_matrix(coeffs)
    system = (L.multiply(inner[:, None]) + sp.diags(bnd.astype(float))).tocsr()
    target = np.where(bnd, g, f)
    # scale rows by their diagonal so that singular rows stay well conditioned
    diag = np.abs(system.diagonal())
    diag[diag == 0] = 1.0
    S = sp.diags(1.0 / diag)
    system, target = (S @ system).tocsr(), S @ target

    def residual(u):
        res = np.abs((L @ u - f)[inner])
        scale = max(1.0, np.abs(f[inner]).max(initial=0.0),
                    np.abs(L.diagonal()[inner]).max(initial=0.0) * np.abs(u).max())
        return float(res.max(initial=0.0)), scale

    u = spsolve(system.tocsc(), target)
    res, scale = residual(u)
    if not (np.all(np.isfinite(u)) and res <= 1e-8 * scale):
        u, _ = gmres(system, target, x0=np.nan_to_num(u), rtol=tol, maxiter=maxiter)
        res, scale = residual(u)
    if not (np.all(np.isfinite(u)) and res <= 1e-8 * scale):
        raise SolverError(f"Dirichlet solve residual {res:.3e} exceeds {1e-8 * scale:.3e}", residual=res)
    u[bnd] = g[bnd]
    return Field(grid, u)


# -- conclusion checks ------------------------------------------------------

@dataclass(frozen=True)
class CSMPReport:
    interior_max: float
    boundary_max: float
    margin: float
    constant: bool
    strict: bool
    argmax: list

    def to_json(self):
        return {"interior_max": self.interior_max, "boundary_max": self.boundary_max,
                "margin": self.margin, "constant": self.constant, "strict": self.strict,
                "argmax": self.argmax}


def csmp_check(field: Field, tolerance=0.0):
    """Compare the interior maximum of ``field`` with its boundary maximum.

    ``strict`` holds when the interior maximum is below the boundary maximum
    by more than ``tolerance`` and the field is not constant (range below
    ``1e-12 (1 + |max|)``).
    """
    v = field.values
    inner, bnd = field.grid.interior, field.grid.boundary
    vmax = float(v.max())
    constant = bool(v.max() - v.min() < CONSTANT_RTOL * (1 + abs(vmax)))
    imax = float(v[inner].max()) if np.any(inner) else -math.inf
    bmax = float(v[bnd].max())
    i = int(np.argmax(v))
    margin = bmax - imax
    return CSMPReport(imax, bmax, margin, constant, bool(not constant and margin > tolerance),
                      field.grid.points[i].tolist())


@dataclass(frozen=True)
class HopfReport:
    h: list
    quotients: list
    extrapolated: float
    order: float
    fitted_exponent: Optional[float]
    positive: bool
    interpolated: bool

    @property
    def converging(self):
        """Successive quotient differences shrink monotonically."""
        steps = np.abs(np.diff(self.quotients))
        return bool(len(steps) < 2 or np.all(steps[1:] <= steps[:-1]))

    def to_json(self):
        return {"h": self.h, "quotients": self.quotients, "extrapolated": self.extrapolated,
                "order": self.order, "fitted_exponent": self.fitted_exponent,
                "positive": self.positive, "converging": self.converging,
                "interpolated": self.interpolated}


def richardson(h, q, default_order=1.0):
    """Extrapolate ``q(h) -> q(0)`` from the last quotients.

    With three or more values the error order ``p`` is estimated from the
    last three (``q(h) ~ q0 + C h^p``); otherwise, or when the estimate is
    not usable, ``p = default_order``. Returns ``(q0, p)``.
    """
    h = np.asarray(h, dtype=float)
    q = np.asarray(q, dtype=float)
    p = default_order
    if len(q) >= 3:
        d1, d2 = q[-3] - q[-2], q[-2] - q[-1]
        if d1 != 0 and d2 != 0 and d1 / d2 > 1:
            p_est = math.log(d1 / d2) / math.log(h[-2] / h[-1])
            if 0.05 <= p_est <= 8:
                p = p_est
        elif d1 == 0 and d2 == 0:
            return float(q[-1]), p
    t = (h[-2] / h[-1]) ** p
    return float(q[-1] + (q[-1] - q[-2]) / (t - 1)), float(p)


def hopf_quotient(u, x_b, nu, h_sequence, tol=1e-8):
    """One-sided quotients ``(u(x_b) - u(x_b - h nu)) / h`` and their limit.

    ``u`` is a :class:`Field` (bilinearly interpolated, which is flagged) or
    a callable on ``(N, n)`` points. ``nu`` is the outward unit normal at
    ``x_b``. The limit comes from :func:`richardson`; ``positive`` means it
    exceeds ``tol``. ``fitted_exponent`` is the log-log slope of ``|q_h|``
    against ``h``, which identifies how fast a vanishing slope is approached.
    """
    h = np.asarray(h_sequence, dtype=float)
    if len(h) < 2 or np.any(np.diff(h) >= 0) or np.any(h <= 0):
        raise ValueError("h_sequence must be positive and strictly decreasing with at least two entries")
    x_b = np.atleast_1d(np.asarray(x_b, dtype=float))
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    nu = nu / np.linalg.norm(nu)
    interpolated = isinstance(u, Field)
    evaluate = u.interpolate if interpolated else (lambda X: np.asarray(u(X), dtype=float))
    pts = np.vstack([x_b[None, :], x_b[None, :] - h[:, None] * nu[None, :]])
    vals = evaluate(pts)
    q = (vals[0] - vals[1:]) / h
    limit, order = richardson(h, q)
    aq = np.abs(q)
    fitted = float(np.polyfit(np.log(h), np.log(aq), 1)[0]) if np.all(aq > 0) else None
    return HopfReport(h.tolist(), q.tolist(), limit, order, fitted, bool(limit > tol), interpolated)
