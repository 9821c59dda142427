"""Radial comparison function on a thin shell next to a sphere.

For a weight ``lam`` integrable near 0, put ``k = 2n(2/R + 1) + 3`` and

    f(r) = r + k * I2(r),   f'(r) = 1 + k * I1(r),   f''(r) = k * lam(r).

On the shell ``R - eps < |x| < R`` the function ``v(x) = m f(R-|x|) / f(eps)``
vanishes on the outer sphere, equals ``m`` on the inner one, and satisfies
``L[v] > 0`` for every operator whose coefficients obey the weight-growth
bounds. Its outward normal derivative on ``|x| = R`` is ``-m / f(eps)``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domains import Annulus, as_points
from .errors import DomainError, NotFoundError
from .sampling import GUARD, make_rng, shell_samples
from .weightfn import RadialWeight

EDGE_TOL = 1e-12


def compute_k(n, R):
    """The constant ``2n(2/R + 1) + 3``."""
    if n < 1 or not R > 0:
        raise ValueError("need n >= 1 and R > 0")
    return 2 * n * (2 / R + 1) + 3


def admissible_epsilon(n, R, weight: RadialWeight, margin=1e-3, iterations=60):
    """Largest shell width found by bisection with ``I1(eps) < (1 - margin) / k``.

    The search runs over ``(0, min(1, R/2))`` (clipped to the weight's
    support), so the returned value also satisfies the width constraint
    strictly.
    """
    k = compute_k(n, R)
    target = (1 - margin) / k
    hi = min(1.0, R / 2, weight.d_max)
    lo = 0.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if weight.integrate_first(mid) < target:
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        raise NotFoundError("no admissible shell width: weight is too steep near 0")
    return lo


class FValues(NamedTuple):
    value: float
    first: float
    second: float


@dataclass(frozen=True)
class Barrier:
    n: int
    R: float
    eps: float
    m: float
    weight: RadialWeight

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be at least 1")
        if not self.m > 0:
            raise ValueError("inner boundary value m must be positive")
        if not 0 < self.eps < min(1.0, self.R / 2):
            raise ValueError(f"eps={self.eps} must lie in (0, min(1, R/2))")
        if self.eps > self.weight.d_max:
            raise ValueError("weight is not defined on the whole shell")
        if not self.weight.integrate_first(self.eps) < 1 / self.k:
            raise ValueError("weight integral over (0, eps] must be below 1/k")
        f_eps = self.eps + self.k * self.weight.integrate_second(self.eps)
        if not self.eps < f_eps < 2 * self.eps:
            raise ValueError("f(eps) outside (eps, 2 eps); weight data inconsistent")
        object.__setattr__(self, "f_at_eps", f_eps)

    @classmethod
    def build(cls, n, R, m, weight, eps=None, margin=1e-3):
        if eps is None:
            eps = admissible_epsilon(n, R, weight, margin=margin)
        return cls(n, R, eps, m, weight)

    @property
    def k(self) -> float:
        return compute_k(self.n, self.R)

    @property
    def shell(self) -> Annulus:
        return Annulus((0.0,) * self.n, self.R - self.eps, self.R)

    @property
    def scale(self) -> float:
        return self.m / self.f_at_eps

    def _radius(self, r):
        arr = np.asarray(r, dtype=float)
        tol = EDGE_TOL * max(1.0, self.R)
        if np.any(arr < -tol) or np.any(arr > self.eps + tol):
            raise DomainError(f"r outside [0, eps={self.eps}]")
        return np.clip(arr, 0.0, self.eps)

    def f_eval(self, r):
        """``(f, f', f'')`` at ``r`` in ``[0, eps]``; ``f''`` is NaN at ``r = 0``."""
        arr = self._radius(r)
        w = self.weight
        value = arr + self.k * w.integrate_second(arr)
        first = 1 + self.k * w.integrate_first(arr)
        pos = arr > 0
        second = np.full_like(arr, np.nan)
        if np.any(pos):
            second[pos] = self.k * w.eval(arr[pos])
        if np.ndim(r) == 0:
            return FValues(float(value), float(first), float(second))
        return FValues(value, first, second)

    def barrier_eval(self, x):
        """Value and gradient of ``v`` on the closed shell.

        Accepts one point (shape ``(n,)``) or a batch ``(N, n)``.
        """
        pts = as_points(x, self.n)
        radial = np.linalg.norm(pts, axis=1)
        rho = self.R - radial
        tol = EDGE_TOL * max(1.0, self.R)
        if np.any(rho < -tol) or np.any(rho > self.eps + tol):
            raise DomainError("point outside the closed shell")
        fv = self.f_eval(rho)
        v = np.asarray(fv.value) * self.scale
        grad = -(np.asarray(fv.first) * self.scale / radial)[:, None] * pts
        if np.ndim(x) == 1 and np.size(x) == self.n:
            return float(v[0]), grad[0]
        return v, grad

    def normal_derivative(self):
        """Outward normal derivative on the outer sphere, ``-m / f(eps)``."""
        return -self.m / self.f_at_eps

    def radial_operator(self, A, b, c, X):
        """Operator applied to ``f(R - |x|)`` through the closed radial form."""
        radial = np.linalg.norm(X, axis=1)
        rho = self.R - radial
        fv = self.f_eval(rho)
        xax = np.einsum("ni,nij,nj->n", X, A, X)
        trace = np.trace(A, axis1=1, axis2=2)
        bx = np.einsum("ni,ni->n", b, X)
        return ((fv.second * radial + fv.first) / radial**3 * xax
                - fv.first / radial * (trace + bx) + fv.value * c)

    def to_json(self):
        return {"n": self.n, "R": self.R, "eps": self.eps, "m": self.m, "k": self.k,
                "f_eps": self.f_at_eps, "normal_derivative": self.normal_derivative(),
                "weight": self.weight.to_json()}


@dataclass(frozen=True)
class ResidualReport:
    min_residual: float
    argmin_point: list
    passed: bool
    n_samples: int
    certified: bool

    def to_json(self):
        return {"min_residual": self.min_residual, "argmin_point": self.argmin_point,
                "pass": self.passed, "n_samples": self.n_samples}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def shell_points(b: Barrier, count=10_000, seed=0, guard=GUARD):
    """Points of the open shell graded toward the outer sphere."""
    X, _ = shell_samples(make_rng(seed), count, np.zeros(b.n), b.R,
                         max_depth=b.eps, guard=guard)
    return X


def residual_check(b: Barrier, coeffs, samples=None, atol=1e-8, seed=0, count=10_000):
    """Minimum over ``samples`` of ``L[f(R-|x|)] - weight(R-|x|)``.

    ``coeffs`` is an ``OperatorCoefficients``; passing requires the
    minimum to be at least ``-atol``. A warning is issued when the
    coefficients carry no growth certificate, since the lower bound is only
    guaranteed for certified coefficients.
    """
    X = shell_points(b, count=count, seed=seed) if samples is None else as_points(samples, b.n)
    certified = coeffs.certificate is not None and coeffs.certificate.passed
    if not certified:
        warnings.warn("coefficients carry no passing growth certificate", stacklevel=2)
    A, bb, c = coeffs.evaluate(X)
    Lv = b.radial_operator(A, bb, c, X)
    resid = Lv - b.weight.eval(b.R - np.linalg.norm(X, axis=1))
    i = int(np.argmin(resid))
    return ResidualReport(float(resid[i]), [float(t) for t in X[i]],
                          bool(resid[i] >= -atol), int(len(X)), certified)
