"""Radial weights and their first and second primitives.

A weight is a continuous, positive, non-increasing function on ``(0, d_max]``
that may blow up at ``0`` but stays integrable there. Three kinds exist:

* ``constant`` -- ``lam0``
* ``power``    -- ``coeff * d**(-alpha)`` with ``0 < alpha < 1``
* ``tabulated`` -- monotone piecewise-linear through samples, continued
  below the first sample by the power law through the first two samples.

Closed forms are used for the first two kinds. Tabulated weights are
integrated by :func:`graded_quad`, a composite Gauss-Legendre rule on dyadic
panels ``[r/2^(j+1), r/2^j]`` whose innermost remainder is closed with a
local power-law fit.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DivergenceError, DomainError

DEFAULT_RTOL = 1e-10
DEFAULT_MAX_LEVELS = 40


@lru_cache(maxsize=8)
def _gauss(order):
    return np.polynomial.legendre.leggauss(order)


def _gauss_pieces(func, edges, order):
    x, w = _gauss(order)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(func(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return float(np.sum(half * (vals @ w)))


def _power_tail(func, x):
    """Integral over ``(0, x]`` of the power law through ``func(x/2)`` and ``func(x)``."""
    f1, f2 = (float(v) for v in np.asarray(func(np.array([x, 0.5 * x])), dtype=float))
    if f1 == 0.0 and f2 == 0.0:
        return 0.0
    if f1 <= 0.0 or f2 <= 0.0:
        return f1 * x
    gamma = math.log2(f2 / f1)
    if gamma >= 1.0:
        return math.inf
    return f1 * x / (1.0 - gamma)


def graded_quad(func, r, *, rtol=DEFAULT_RTOL, max_levels=DEFAULT_MAX_LEVELS,
                breakpoints=None, order=8):
    """Integrate ``func`` over ``(0, r]`` allowing an integrable singularity at 0.

    ``func`` must accept a 1-D array. Each level adds the next dyadic panel
    toward the origin (so the unresolved remainder is halved) and closes the
    rest with a power-law tail. Iteration stops when two successive
    estimates agree to ``rtol`` relative; ``breakpoints`` (e.g. the nodes of
    a piecewise-linear table) are inserted into every panel so each piece is
    smooth.

    Raises :class:`DivergenceError` after ``max_levels`` halvings without
    convergence -- the usual symptom of a non-integrable singularity.
    """
    if r == 0:
        return 0.0
    if not r > 0:
        raise DomainError(f"upper limit must be positive, got {r}")
    bps = None if breakpoints is None else np.sort(np.asarray(breakpoints, dtype=float))
    total = 0.0
    hi = float(r)
    prev = None
    settled = 0
    for _ in range(max_levels):
        lo = 0.5 * hi
        edges = [lo, hi]
        if bps is not None:
            inner = bps[(bps > lo) & (bps < hi)]
            if inner.size:
                edges = np.concatenate([[lo], inner, [hi]])
        total += _gauss_pieces(func, np.asarray(edges, dtype=float), order)
        hi = lo
        est = total + _power_tail(func, hi)
        if prev is not None and math.isfinite(est) and abs(est - prev) <= rtol * abs(est):
            settled += 1
            if settled >= 2:
                return est
        else:
            settled = 0
        prev = est
    raise DivergenceError(
        f"graded quadrature did not converge in {max_levels} levels "
        f"(last estimate {prev!r}); integrand is likely not integrable at 0")


@dataclass(frozen=True)
class RadialWeight:
    """A positive non-increasing weight on ``(0, d_max]``.

    Build instances with :meth:`constant`, :meth:`power`, :meth:`tabulated`
    or :meth:`from_csv` rather than the raw constructor.
    """

    kind: str
    params: tuple
    d_max: float = math.inf
    samples: tuple = field(default=(), repr=False)
    rtol: float = DEFAULT_RTOL
    max_levels: int = DEFAULT_MAX_LEVELS

    def __post_init__(self):
        if self.kind == "constant":
            (lam0,) = self.params
            if not lam0 > 0:
                raise ValueError("constant weight must be positive")
        elif self.kind == "power":
            coeff, alpha = self.params
            if not coeff > 0:
                raise ValueError("power weight coefficient must be positive")
            if not 0 < alpha < 1:
                raise ValueError("power weight exponent must lie in (0, 1)")
        elif self.kind == "tabulated":
            d, v = (np.asarray(a, dtype=float) for a in self.samples)
            if d.size < 2 or d.shape != v.shape:
                raise ValueError("tabulated weight needs at least two (distance, value) pairs")
            if np.any(d <= 0) or np.any(np.diff(d) <= 0):
                raise ValueError("tabulated distances must be positive and strictly increasing")
            if np.any(v <= 0):
                raise ValueError("tabulated values must be positive")
            object.__setattr__(self, "d_max", float(d[-1]))
        else:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if not self.d_max > 0:
            raise ValueError("d_max must be positive")
        self._check_monotone()

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, lam0, d_max=math.inf):
        return cls("constant", (float(lam0),), d_max=float(d_max))

    @classmethod
    def power(cls, coeff, alpha, d_max=math.inf):
        return cls("power", (float(coeff), float(alpha)), d_max=float(d_max))

    @classmethod
    def tabulated(cls, distances, values, rtol=DEFAULT_RTOL, max_levels=DEFAULT_MAX_LEVELS):
        d = tuple(float(x) for x in distances)
        v = tuple(float(x) for x in values)
        if len(d) >= 2 and v[0] > 0 and v[1] > 0 and d[0] > 0 and d[1] > d[0]:
            beta = math.log(v[0] / v[1]) / math.log(d[1] / d[0])
        else:
            beta = 0.0
        return cls("tabulated", (beta,), samples=(d, v), rtol=rtol, max_levels=max_levels)

    @classmethod
    def from_csv(cls, path, **kwargs):
        """Load a two-column ``distance,value`` CSV (an optional header row is skipped)."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise
                    continue  # header
        if not rows:
            raise ValueError(f"no numeric rows in {path}")
        d, v = zip(*rows)
        return cls.tabulated(d, v, **kwargs)

    def to_json(self):
        out = {"kind": self.kind, "d_max": self.d_max if math.isfinite(self.d_max) else None}
        if self.kind == "constant":
            out["lam0"] = self.params[0]
        elif self.kind == "power":
            out["coeff"], out["alpha"] = self.params
        else:
            out["n_samples"] = len(self.samples[0])
            out["tail_exponent"] = self.params[0]
        return out

    def label(self):
        if self.kind == "constant":
            return f"constant:{self.params[0]:g}"
        if self.kind == "power":
            return f"power:{self.params[0]:g},{self.params[1]:g}"
        return f"tabulated[{len(self.samples[0])}]"

    # -- evaluation ---------------------------------------------------------
    def _check_domain(self, d, allow_zero=False):
        arr = np.asarray(d, dtype=float)
        bad = (arr < 0) if allow_zero else (arr <= 0)
        if np.any(bad) or np.any(arr > self.d_max) or np.any(np.isnan(arr)):
            raise DomainError(f"distance outside (0, {self.d_max}]: {d!r}")
        return arr

    def _raw(self, d):
        if self.kind == "constant":
            return np.full_like(d, self.params[0])
        if self.kind == "power":
            coeff, alpha = self.params
            return coeff * d ** (-alpha)
        ds, vs = (np.asarray(a) for a in self.samples)
        beta = self.params[0]
        out = np.interp(d, ds, vs)
        below = d < ds[0]
        if np.any(below):
            out = np.where(below, vs[0] * (np.where(below, d, ds[0]) / ds[0]) ** (-beta), out)
        return out

    def eval(self, d):
        """Weight value at distance(s) ``d`` in ``(0, d_max]``."""
        arr = self._check_domain(d)
        out = self._raw(arr)
        return float(out) if np.ndim(d) == 0 else out

    __call__ = eval

    def _check_monotone(self, pairs=1000):
        hi = self.d_max if math.isfinite(self.d_max) else 1e3
        lo = hi * 1e-9
        if self.kind == "tabulated":
            lo = min(lo, self.samples[0][0] * 1e-3)
        grid = np.geomspace(lo, hi, pairs + 1)
        vals = self._raw(grid)
        if np.any(np.diff(vals) > 1e-12 * np.abs(vals[:-1])) or np.any(vals <= 0):
            raise ValueError("weight is not positive and non-increasing on its support")

    # -- primitives ---------------------------------------------------------
    def integrate_first(self, r):
        """``I1(r) = int_0^r weight``."""
        arr = self._check_domain(r, allow_zero=True)
        if self.kind == "constant":
            out = self.params[0] * arr
        elif self.kind == "power":
            coeff, alpha = self.params
            out = coeff * arr ** (1 - alpha) / (1 - alpha)
        else:
            return self._map(self.quadrature_first, r, arr)
        return float(out) if np.ndim(r) == 0 else out

    def integrate_second(self, r):
        """``I2(r) = int_0^r I1(s) ds``."""
        arr = self._check_domain(r, allow_zero=True)
        if self.kind == "constant":
            out = 0.5 * self.params[0] * arr**2
        elif self.kind == "power":
            coeff, alpha = self.params
            out = coeff * arr ** (2 - alpha) / ((1 - alpha) * (2 - alpha))
        else:
            return self._map(self.quadrature_second, r, arr)
        return float(out) if np.ndim(r) == 0 else out

    def _map(self, fn, r, arr):
        if np.ndim(r) == 0:
            return fn(float(arr))
        return np.array([fn(float(x)) for x in arr.ravel()]).reshape(arr.shape)

    def _breakpoints(self):
        return np.asarray(self.samples[0]) if self.kind == "tabulated" else None

    def quadrature_first(self, r):
        """``I1(r)`` by graded quadrature regardless of kind."""
        self._check_domain(r, allow_zero=True)
        return graded_quad(self._raw, float(r), rtol=self.rtol, max_levels=self.max_levels,
                           breakpoints=self._breakpoints())

    def quadrature_second(self, r):
        """``I2(r)`` by graded quadrature of ``(r - t) * weight(t)`` (Cauchy's repeated-integral form)."""
        self._check_domain(r, allow_zero=True)
        r = float(r)
        return graded_quad(lambda t: (r - t) * self._raw(t), r, rtol=self.rtol,
                           max_levels=self.max_levels, breakpoints=self._breakpoints())


def sample_function(func, d_min, d_max, count=None, ratio=1.002):
    """Tabulate ``func`` on a geometric grid, e.g. to force the quadrature path."""
    if count is None:
        count = int(math.ceil(math.log(d_max / d_min) / math.log(ratio))) + 1
    d = np.geomspace(d_min, d_max, count)
    return RadialWeight.tabulated(d, func(d))
