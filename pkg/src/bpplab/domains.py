"""Simple domain descriptors: balls, annuli and axis-aligned boxes.

All distance methods take an ``(N, n)`` array of points and return an
``(N,)`` array. Distances to the boundary are positive inside the domain.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_points(x, n=None):
    """Coerce ``x`` to a float array of shape ``(N, n)``."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1) if n is None or pts.size == n else pts.reshape(-1, 1)
    if n is not None and pts.shape[1] != n:
        raise ValueError(f"expected points of dimension {n}, got shape {pts.shape}")
    return pts


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def n(self) -> int:
        return len(self.center)

    def radial(self, X):
        return np.linalg.norm(as_points(X, self.n) - np.asarray(self.center), axis=1)

    def depth(self, X):
        """Distance to the bounding sphere, signed positive inside."""
        return self.radius - self.radial(X)

    def contains(self, X):
        return self.depth(X) > 0

    def to_json(self):
        return {"kind": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Annulus:
    """Open shell ``inner < |x - center| < outer``."""

    center: tuple
    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not 0 <= self.inner < self.outer:
            raise ValueError("annulus needs 0 <= inner < outer")

    @property
    def n(self) -> int:
        return len(self.center)

    @property
    def width(self) -> float:
        return self.outer - self.inner

    def radial(self, X):
        return np.linalg.norm(as_points(X, self.n) - np.asarray(self.center), axis=1)

    def depth(self, X):
        r = self.radial(X)
        return np.minimum(self.outer - r, r - self.inner)

    def outer_depth(self, X):
        return self.outer - self.radial(X)

    def contains(self, X):
        return self.depth(X) > 0

    def to_json(self):
        return {"kind": "annulus", "center": list(self.center),
                "inner": self.inner, "outer": self.outer}


@dataclass(frozen=True)
class Box:
    """Open axis-aligned box ``lo < x < hi``; ``Box((-1,)*n, (1,)*n)`` is the unit cube."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return len(self.lo)

    def depth(self, X):
        pts = as_points(X, self.n)
        return np.minimum(pts - np.asarray(self.lo), np.asarray(self.hi) - pts).min(axis=1)

    def contains(self, X):
        return self.depth(X) > 0

    def distance(self, X):
        """Euclidean distance to the closed box (zero inside)."""
        pts = as_points(X, self.n)
        gap = np.maximum(np.asarray(self.lo) - pts, 0.0) + np.maximum(pts - np.asarray(self.hi), 0.0)
        return np.linalg.norm(gap, axis=1)

    def to_json(self):
        return {"kind": "box", "lo": list(self.lo), "hi": list(self.hi)}


def domain_from_json(data):
    kind = data["kind"]
    if kind == "ball":
        return Ball(tuple(data["center"]), float(data["radius"]))
    if kind == "annulus":
        return Annulus(tuple(data["center"]), float(data["inner"]), float(data["outer"]))
    if kind == "box":
        return Box(tuple(data["lo"]), tuple(data["hi"]))
    raise ValueError(f"unknown domain kind {kind!r}")
