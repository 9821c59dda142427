"""Singular sets, outward balls, porosity and cone chains.

A scene holds a domain ``omega`` (a box or ball), a singular set ``S`` and a
test set ``T``. The outward ball property asks for an open ball inside
``omega`` that avoids ``S`` and ``T`` while its sphere touches ``T``. It is
universally quantified over ``T``, so a grid search can only support it or
falsify it at a stated resolution.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .domains import Box, as_points, domain_from_json
from .errors import DegenerateSceneError, NestingError

TOUCH_TOL = 1e-12


# -- singular sets ----------------------------------------------------------

class SingularSet:
    """Interface: ``distance(X)`` and ``nearest(X)`` for ``(N, n)`` points."""

    kind = "abstract"

    def distance(self, X):
        raise NotImplementedError

    def nearest(self, X):
        raise NotImplementedError

    def to_json(self):
        return {"kind": self.kind}


class EmptySet(SingularSet):
    kind = "empty"

    def distance(self, X):
        return np.full(len(as_points(X)), np.inf)

    def nearest(self, X):
        return np.full(as_points(X).shape, np.nan)


class FinitePoints(SingularSet):
    kind = "finite_points"

    def __init__(self, points):
        self.points = as_points(points)
        if len(self.points) == 0:
            raise ValueError("finite point set must be nonempty; use EmptySet")
        self._tree = cKDTree(self.points)

    def distance(self, X):
        return self._tree.query(as_points(X, self.points.shape[1]))[0]

    def nearest(self, X):
        return self.points[self._tree.query(as_points(X, self.points.shape[1]))[1]]

    def to_json(self):
        return {"kind": self.kind, "points": self.points.tolist()}


class C2Curve(SingularSet):
    """A curve stored as a polyline; distances are exact point-to-segment.

    ``max_second_difference`` records the largest ``|p_{i+1} - 2p_i + p_{i-1}|``
    of the sampling, a proxy for how well the polyline resolves curvature.
    """

    kind = "c2_curve"

    def __init__(self, vertices):
        self.vertices = as_points(vertices)
        if len(self.vertices) < 2:
            raise ValueError("a curve needs at least two vertices")
        seg = np.diff(self.vertices, axis=0)
        self._seg = seg
        self._len2 = np.einsum("ij,ij->i", seg, seg)
        self._half = 0.5 * math.sqrt(float(self._len2.max()))
        self._mid_tree = cKDTree(self.vertices[:-1] + 0.5 * seg)
        sd = self.vertices[2:] - 2 * self.vertices[1:-1] + self.vertices[:-2]
        self.max_second_difference = float(np.linalg.norm(sd, axis=1).max()) if len(sd) else 0.0

    @classmethod
    def from_function(cls, phi, samples=501, t_range=(0.0, 1.0)):
        """Sample ``phi: t -> (N, n)`` on a uniform grid of ``t`` (endpoints are limits)."""
        t = np.linspace(*t_range, samples)
        return cls(phi(t))

    def _segment_points(self, X, idx):
        """Closest points on segments ``idx`` (shape ``(N, k)``) to each ``X``."""
        a, s = self.vertices[idx], self._seg[idx]
        len2 = np.where(self._len2[idx] > 0, self._len2[idx], 1.0)
        t = np.clip(np.einsum("nkj,nkj->nk", X[:, None, :] - a, s) / len2, 0.0, 1.0)
        P = a + t[..., None] * s
        return P, np.linalg.norm(X[:, None, :] - P, axis=2)

    def _closest(self, X, k=64):
        X = as_points(X, self.vertices.shape[1])
        nseg = len(self._seg)
        k = min(k, nseg)
        dmid, idx = self._mid_tree.query(X, k=k)
        idx = np.asarray(idx).reshape(len(X), k)
        dmid = np.asarray(dmid).reshape(len(X), k)
        P, dist = self._segment_points(X, idx)
        j = np.argmin(dist, axis=1)
        rows = np.arange(len(X))
        best, bestP = dist[rows, j], P[rows, j]
        # segments beyond the k-th midpoint are at least this far away
        unsure = (dmid[:, -1] - self._half < best) & (k < nseg)
        if np.any(unsure):
            Xu = X[unsure]
            for i0 in range(0, len(Xu), 64):
                chunk = Xu[i0:i0 + 64]
                allidx = np.broadcast_to(np.arange(nseg), (len(chunk), nseg))
                Pu, du = self._segment_points(chunk, allidx)
                ju = np.argmin(du, axis=1)
                r = np.arange(len(chunk))
                sel = np.flatnonzero(unsure)[i0:i0 + 64]
                best[sel], bestP[sel] = du[r, ju], Pu[r, ju]
        return best, bestP

    def distance(self, X):
        return self._closest(X)[0]

    def nearest(self, X):
        return self._closest(X)[1]

    def to_json(self):
        return {"kind": self.kind, "vertices": self.vertices.tolist()}


class AxisCross(SingularSet):
    """Both coordinate axes of the plane."""

    kind = "axis_cross"

    def distance(self, X):
        X = as_points(X, 2)
        return np.minimum(np.abs(X[:, 0]), np.abs(X[:, 1]))

    def nearest(self, X):
        X = as_points(X, 2)
        onto_x1 = np.abs(X[:, 0]) <= np.abs(X[:, 1])
        P = X.copy()
        P[onto_x1, 0] = 0.0
        P[~onto_x1, 1] = 0.0
        return P


class HalfCross(SingularSet):
    """The ``x2`` axis together with the ray ``{x2 = 0, x1 >= 0}``."""

    kind = "half_cross"

    def _parts(self, X):
        X = as_points(X, 2)
        d_axis = np.abs(X[:, 0])
        d_ray = np.hypot(np.maximum(-X[:, 0], 0.0), X[:, 1])
        return X, d_axis, d_ray

    def distance(self, X):
        _, d_axis, d_ray = self._parts(X)
        return np.minimum(d_axis, d_ray)

    def nearest(self, X):
        X, d_axis, d_ray = self._parts(X)
        P = np.zeros_like(X)
        use_axis = d_axis <= d_ray
        P[use_axis, 1] = X[use_axis, 1]
        P[~use_axis, 0] = np.maximum(X[~use_axis, 0], 0.0)
        return P


class LineFamily(SingularSet):
    """Vertical lines ``x1 = 1/(2k)`` for ``k = 1, 2, ...``.

    The lines accumulate at ``x1 = 0``; for ``x1 <= 0`` the distance is the
    infimum ``-x1`` and the reported nearest point lies on the line of
    index ``k_max``.
    """

    kind = "line_family"

    def __init__(self, k_max=10**9):
        self.k_max = int(k_max)

    def _nearest_x1(self, x1):
        out = np.empty_like(x1)
        pos = x1 > 0
        k = np.clip(np.floor(1.0 / (2.0 * np.where(pos, x1, 1.0))), 1, self.k_max)
        lo = 1.0 / (2.0 * k)
        hi = 1.0 / (2.0 * np.clip(k + 1, 1, self.k_max))
        out[pos] = np.where(np.abs(x1 - lo) <= np.abs(x1 - hi), lo, hi)[pos]
        out[~pos] = 1.0 / (2.0 * self.k_max)
        return out

    def distance(self, X):
        X = as_points(X, 2)
        x1 = X[:, 0]
        d = np.abs(x1 - self._nearest_x1(x1))
        return np.where(x1 > 0, d, -x1)

    def nearest(self, X):
        X = as_points(X, 2)
        P = X.copy()
        P[:, 0] = self._nearest_x1(X[:, 0])
        return P

    def to_json(self):
        return {"kind": self.kind, "k_max": self.k_max}


def singular_from_json(data):
    kind = data["kind"]
    if kind == "empty":
        return EmptySet()
    if kind == "finite_points":
        return FinitePoints(data["points"])
    if kind == "c2_curve":
        return C2Curve(data["vertices"])
    if kind == "axis_cross":
        return AxisCross()
    if kind == "half_cross":
        return HalfCross()
    if kind == "line_family":
        return LineFamily(data.get("k_max", 10**9))
    raise ValueError(f"unknown singular set kind {kind!r}")


# -- test sets and scenes ---------------------------------------------------

@dataclass(frozen=True)
class TestSet:
    """A finite point cloud, optionally joined with a closed box region."""

    points: np.ndarray
    region: Optional[Box] = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        pts = as_points(self.points) if np.size(self.points) else np.zeros((0, 0))
        object.__setattr__(self, "points", pts)
        if len(pts) == 0 and self.region is None:
            raise ValueError("test set must be nonempty")
        object.__setattr__(self, "_tree", cKDTree(pts) if len(pts) else None)

    def distance(self, X):
        X = as_points(X)
        d = np.full(len(X), np.inf)
        if self._tree is not None:
            d = self._tree.query(X)[0]
        if self.region is not None:
            d = np.minimum(d, self.region.distance(X))
        return d

    def nearest(self, X):
        X = as_points(X)
        best = np.full(len(X), np.inf)
        P = np.zeros_like(X)
        if self._tree is not None:
            best, idx = self._tree.query(X)
            P = self.points[idx].copy()
        if self.region is not None:
            Q = np.clip(X, self.region.lo, self.region.hi)
            dq = np.linalg.norm(X - Q, axis=1)
            take = dq < best
            P[take] = Q[take]
        return P

    def to_json(self):
        out = {"points": self.points.tolist()}
        if self.region is not None:
            out["region"] = self.region.to_json()
        return out


@dataclass(frozen=True)
class SingularSetScene:
    omega: object
    singular: SingularSet
    T: TestSet
    name: str = ""

    def __post_init__(self):
        if len(self.T.points) and np.any(self.omega.depth(self.T.points) <= -TOUCH_TOL):
            raise ValueError("test set points must lie in omega")

    @property
    def n(self):
        return self.omega.n

    def to_json(self):
        return {"name": self.name, "omega": self.omega.to_json(),
                "singular": self.singular.to_json(), "T": self.T.to_json()}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        t = data["T"]
        region = domain_from_json(t["region"]) if t.get("region") else None
        return cls(domain_from_json(data["omega"]), singular_from_json(data["singular"]),
                   TestSet(np.asarray(t.get("points", []), dtype=float), region),
                   name=data.get("name", ""))


def unit_square():
    return Box((-1.0, -1.0), (1.0, 1.0))


def example_scene(name):
    """Prebuilt planar scenes on ``(-1, 1)^2``.

    ``finite_points`` (three points, ``T`` a distant point), ``c2_curve`` (a
    parabolic arc, ``T`` a point on it), ``axis_cross`` and ``half_cross``
    (``T`` the origin), ``line_family`` (``T`` the left half-strip
    ``(-1, 0] x (-1, 1)`` as a box plus a cloud on ``x1 = 0``),
    ``dense_cloud`` (a 0.02-spaced lattice on ``[-0.2, 0.2]^2``) and
    ``empty``.
    """
    omega = unit_square()
    origin = TestSet(np.zeros((1, 2)))
    if name == "finite_points":
        S = FinitePoints([[0.3, 0.2], [-0.4, 0.5], [0.1, -0.6]])
        return SingularSetScene(omega, S, TestSet(np.array([[-0.6, -0.5]])), name)
    if name == "c2_curve":
        S = C2Curve.from_function(lambda t: np.column_stack([1.6 * t - 0.8, 0.5 * (1.6 * t - 0.8) ** 2 - 0.3]))
        return SingularSetScene(omega, S, TestSet(np.array([[0.0, -0.3]])), name)
    if name == "axis_cross":
        return SingularSetScene(omega, AxisCross(), origin, name)
    if name == "half_cross":
        return SingularSetScene(omega, HalfCross(), origin, name)
    if name == "line_family":
        edge = np.column_stack([np.zeros(41), np.linspace(-0.999, 0.999, 41)])
        region = Box((-1.0, -1.0), (0.0, 1.0))
        return SingularSetScene(omega, LineFamily(), TestSet(edge, region), name)
    if name == "dense_cloud":
        g = np.linspace(-0.2, 0.2, 21)
        S = FinitePoints(np.array(np.meshgrid(g, g)).reshape(2, -1).T)
        return SingularSetScene(omega, S, TestSet(np.array([[0.0, 0.0]])), name)
    if name == "empty":
        return SingularSetScene(omega, EmptySet(), origin, name)
    raise ValueError(f"unknown scene {name!r}")


SCENES = ("finite_points", "c2_curve", "axis_cross", "half_cross", "line_family", "dense_cloud", "empty")


# -- outward ball search ----------------------------------------------------

def _bounding_box(omega):
    if isinstance(omega, Box):
        return np.asarray(omega.lo), np.asarray(omega.hi)
    c = np.asarray(omega.center)
    return c - omega.radius, c + omega.radius


def grid_centers(omega, h):
    """Points ``i/K`` (``K = round(1/h)``) strictly inside ``omega``."""
    K = max(1, int(round(1.0 / h)))
    lo, hi = _bounding_box(omega)
    axes = [np.arange(math.ceil(a * K), math.floor(b * K) + 1) / K for a, b in zip(lo, hi)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    return G[omega.depth(G) > 0]


def _candidates(scene, h, tol):
    X = grid_centers(scene.omega, h)
    dT = scene.T.distance(X)
    outside_T = dT > tol
    if not np.any(outside_T):
        raise DegenerateSceneError("no grid center lies outside the test set")
    dS = scene.singular.distance(X)
    keep = outside_T & (dS > tol)
    return X[keep], dT[keep], dS[keep], scene.omega.depth(X[keep])


@dataclass(frozen=True)
class OutwardBallResult:
    found: bool
    resolution: float
    center: Optional[list] = None
    radius: Optional[float] = None
    touch_point: Optional[list] = None
    gap_to_singular: Optional[float] = None
    n_candidates: int = 0

    @property
    def status(self):
        return "found" if self.found else "not_found_at_resolution"

    def to_json(self):
        return {"status": self.status, "resolution": self.resolution, "center": self.center,
                "radius": self.radius, "touch_point": self.touch_point,
                "gap_to_singular": self.gap_to_singular, "n_candidates": self.n_candidates}


def outward_ball_search(scene: SingularSetScene, h, tol=TOUCH_TOL):
    """Grid search for a ball in ``omega`` avoiding ``S`` and ``T`` that touches ``T``.

    Every center ``x0`` of the ``h``-grid outside ``T`` and ``S`` gets the
    radius ``R = dist(x0, T)``, so the sphere touches ``T``. It is accepted
    when ``dist(x0, S) >= R`` and ``B_R(x0)`` lies in ``omega`` (both up to
    ``tol``). The accepted ball with the largest ``R`` is returned; ties go
    to the lexicographically smallest center.
    """
    X, dT, dS, depth = _candidates(scene, h, tol)
    ok = (dS >= dT - tol) & (depth >= dT - tol) & np.isfinite(dT)
    n_cand = int(len(X))
    if not np.any(ok):
        return OutwardBallResult(False, float(h), n_candidates=n_cand)
    X, dT, dS = X[ok], dT[ok], dS[ok]
    top = dT >= dT.max() - tol
    Xt = X[top]
    order = np.lexsort(Xt.T[::-1])
    i = np.flatnonzero(top)[order[0]]
    touch = scene.T.nearest(X[i:i + 1])[0]
    return OutwardBallResult(True, float(h), X[i].tolist(), float(dT[i]), touch.tolist(),
                             float(dS[i] - dT[i]), n_cand)


@dataclass(frozen=True)
class FalsificationReport:
    verdict: str
    resolution: float
    n_candidates: int
    n_witnessed: int
    witnesses: list = field(default_factory=list, repr=False)
    unwitnessed: list = field(default_factory=list, repr=False)

    @property
    def falsified(self):
        return self.verdict == "falsified_at_resolution"

    def to_json(self, max_witnesses=20):
        return {"verdict": self.verdict, "resolution": self.resolution,
                "n_candidates": self.n_candidates, "n_witnessed": self.n_witnessed,
                "witnesses": self.witnesses[:max_witnesses],
                "unwitnessed": self.unwitnessed[:max_witnesses]}


def falsify_outward_ball(scene: SingularSetScene, candidate_balls=None, h=0.05, tol=TOUCH_TOL):
    """Look for a point of ``S`` inside every candidate ball.

    Without ``candidate_balls`` the candidates are all ``h``-grid balls
    ``B_R(x0)`` inside ``omega`` whose sphere touches ``T``
    (``R = dist(x0, T)``). A witness is the point of ``S`` nearest to the
    center when it lies strictly inside the ball. The verdict is
    ``falsified_at_resolution`` when every candidate has a witness,
    ``not_falsified`` otherwise and ``no_candidates`` when there is none.
    """
    if candidate_balls is None:
        X, dT, _, depth = _candidates(scene, h, tol)
        inside = (depth >= dT - tol) & np.isfinite(dT)
        X, R = X[inside], dT[inside]
    else:
        X = as_points([c for c, _ in candidate_balls], scene.n)
        R = np.array([r for _, r in candidate_balls], dtype=float)
    if len(X) == 0:
        return FalsificationReport("no_candidates", float(h), 0, 0)
    dS = scene.singular.distance(X)
    hit = dS < R - tol
    P = scene.singular.nearest(X[hit]) if np.any(hit) else np.zeros((0, scene.n))
    witnesses = [{"center": c.tolist(), "radius": float(r), "witness": p.tolist()}
                 for c, r, p in zip(X[hit], R[hit], P)]
    unwitnessed = [{"center": c.tolist(), "radius": float(r)} for c, r in zip(X[~hit], R[~hit])]
    verdict = "falsified_at_resolution" if np.all(hit) else "not_falsified"
    return FalsificationReport(verdict, float(h), int(len(X)), int(hit.sum()), witnesses, unwitnessed)


# -- porosity ---------------------------------------------------------------

@dataclass(frozen=True)
class PorosityReport:
    point: list
    scales: list
    ratios: list
    tol: float

    @property
    def passed(self):
        return self.ratios[-1] >= 1 - self.tol

    def to_json(self):
        return {"point": self.point, "scales": self.scales, "ratios": self.ratios,
                "tol": self.tol, "pass": self.passed}


def hole_radius(singular, s, r, cells=100):
    """Largest radius, over a grid of centers, of a ball inside ``B_r(s)`` missing ``S``."""
    s = np.asarray(s, dtype=float)
    axes = [np.linspace(c - r, c + r, 2 * cells + 1) for c in s]
    Y = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(s))
    room = r - np.linalg.norm(Y - s, axis=1)
    Y, room = Y[room > 0], room[room > 0]
    return float(np.max(np.minimum(room, singular.distance(Y))))


def porosity_check(scene: SingularSetScene, s, scales, tol=0.05, cells=100):
    """Porosity ratios ``2 rho(r) / r`` at the point ``s`` of ``S``.

    ``rho(r)`` is the largest hole found by :func:`hole_radius`. A ratio of
    1 is the most a set containing ``s`` allows; the check passes when the
    ratio at the finest scale is at least ``1 - tol``.
    """
    scales = [float(r) for r in scales]
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly decreasing")
    ratios = [2 * hole_radius(scene.singular, s, r, cells) / r for r in scales]
    return PorosityReport(list(map(float, s)), scales, ratios, tol)


# -- cone chains and the order certificate ---------------------------------

def cone_ratio(theta):
    """``(1 + sin(theta)/3) / (1 + 2 sin(theta)/3)``, written as ``(3 + s)/(3 + 2s)``."""
    s = math.sin(theta)
    return (3 + s) / (3 + 2 * s)


@dataclass(frozen=True)
class ConeChain:
    apex: tuple
    axis: tuple
    theta: float
    r0: float
    K: int
    kappa: float
    centers: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    nesting_margins: np.ndarray = field(repr=False)

    def to_json(self):
        return {"apex": list(self.apex), "axis": list(self.axis), "theta": self.theta,
                "r0": self.r0, "K": self.K, "kappa": self.kappa,
                "centers": self.centers.tolist(), "radii": self.radii.tolist(),
                "max_nesting_defect": float(np.abs(self.nesting_margins).max())}


def cone_chain(apex, axis, theta, r0, K, tol=1e-12):
    """Balls ``B_{r_k}(y_k)`` in the cone of half-angle ``theta``, tangent to its boundary.

    ``|y_k - apex| = (r0 / sin(theta)) kappa^k`` and ``r_k = |y_k - apex| sin(theta)``.
    Each ``B_{r_k/3}(y_k)`` lies in ``B_{2 r_{k+1}/3}(y_{k+1})``; the margins
    ``2 r_{k+1}/3 - |y_k - y_{k+1}| - r_k/3`` vanish analytically and are
    checked against ``tol * r0``.
    """
    if not 0 < theta <= math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2]")
    if K < 2 or not r0 > 0:
        raise ValueError("need K >= 2 and r0 > 0")
    apex = np.asarray(apex, dtype=float)
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    kappa = cone_ratio(theta)
    s = math.sin(theta)
    dist = (r0 / s) * kappa ** np.arange(K)
    centers = apex + dist[:, None] * axis
    radii = dist * s
    gaps = np.linalg.norm(np.diff(centers, axis=0), axis=1)
    margins = 2 * radii[1:] / 3 - gaps - radii[:-1] / 3
    if np.any(margins < -tol * r0):
        raise NestingError(f"nesting inclusion violated by {-margins.min():.3e}")
    return ConeChain(tuple(apex), tuple(axis), float(theta), float(r0), int(K), kappa,
                     centers, radii, margins)


def unit_ball_volume(n):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def loglog_slope(distances, values):
    d = np.asarray(distances, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(d <= 0) or np.any(v <= 0):
        raise ValueError("distances and values must be positive")
    return float(np.polyfit(np.log(d), np.log(v), 1)[0])


def order_certificate(kappa, C, n, w_samples=None):
    """Order bound from the cone chain and a weak Harnack constant ``C``.

    ``L = omega_n / (C 3^n)`` with ``omega_n`` the unit-ball volume, and
    ``m*`` is the smallest integer with ``kappa^m < L``: a zero of order
    ``m*`` or higher contradicts the Harnack chain. With ``w_samples``, a
    sequence of ``(distance, value)`` pairs, the fitted log-log slope is
    compared with ``m*``; a slope above ``m*`` makes the certificate
    inconclusive.
    """
    if not C > 0:
        raise ValueError("weak Harnack constant C must be positive")
    if not 0 < kappa < 1:
        raise ValueError("kappa must lie in (0, 1)")
    L = unit_ball_volume(n) / (C * 3**n)
    if L > 1:
        m_star = 0
    else:
        m_star = max(0, math.ceil(math.log(L) / math.log(kappa)))
        while kappa**m_star >= L:
            m_star += 1
        while m_star > 0 and kappa ** (m_star - 1) < L:
            m_star -= 1
    out = {"kappa": float(kappa), "C": float(C), "n": int(n), "L": L, "m_star": m_star,
           "status": "finite_order_bound", "fitted_slope": None}
    if w_samples is not None:
        d, v = np.asarray(w_samples, dtype=float).T
        slope = loglog_slope(d, v)
        out["fitted_slope"] = slope
        if slope > m_star:
            out["status"] = "inconclusive"
    return out
