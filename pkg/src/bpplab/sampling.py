"""Reproducible point samplers graded toward a spherical boundary."""
from __future__ import annotations

import numpy as np

GUARD = 1e-12


def make_rng(seed=0):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def unit_directions(rng, count, n):
    """Uniform directions on the unit sphere in R^n (``±1`` when n == 1)."""
    if n == 1:
        return rng.choice([-1.0, 1.0], size=(count, 1))
    g = rng.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def graded_depths(rng, count, lo, hi):
    """Depths in ``[lo, hi]``: half log-uniform (graded toward ``lo``), half uniform."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")
    k = count // 2
    logs = rng.uniform(np.log(lo), np.log(hi), size=k)
    flat = rng.uniform(lo, hi, size=count - k)
    d = np.concatenate([np.exp(logs), flat])
    # pin the extremes so the guard band itself is probed
    if count >= 2:
        d[0], d[-1] = lo, hi
    return d


def shell_samples(rng, count, center, radius, max_depth=None, guard=GUARD):
    """Points ``x`` with ``radius - |x - center| = d`` for graded ``d``.

    Returns ``(X, d)``; ``d`` ranges over ``[guard, max_depth - guard]``
    (``max_depth`` defaults to the radius, i.e. the whole ball). The guard
    shrinks to ``max_depth / 4`` for very thin shells.
    """
    center = np.asarray(center, dtype=float)
    n = center.size
    top = radius if max_depth is None else min(max_depth, radius)
    guard = min(guard, top / 4)  # thin shells keep a usable depth range
    d = graded_depths(rng, count, guard, top - guard)
    X = center + (radius - d)[:, None] * unit_directions(rng, count, n)
    return X, d


def collar_edges(top, levels, ratio=0.5):
    """Geometric collar boundaries ``top, top*ratio, ...`` (length ``levels + 1``)."""
    return top * ratio ** np.arange(levels + 1)
