import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpplab import geometry as g
from bpplab.domains import Box
from bpplab.errors import DegenerateSceneError, NestingError


def brute_distance(points, X):
    return np.min(np.linalg.norm(X[:, None, :] - points[None, :, :], axis=2), axis=1)


def test_cone_ratio_exact_values():
    assert g.cone_ratio(math.pi / 2) == 0.8
    assert g.cone_ratio(math.pi / 6) == 0.875


@pytest.mark.parametrize("theta", [math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2])
def test_cone_chain_nesting(theta):
    chain = g.cone_chain((0.0, 0.0), (0.0, 2.0), theta, 0.3, 25)
    assert np.abs(chain.nesting_margins).max() <= 1e-12
    # each ball stays inside the cone: its center sits at distance r/sin(theta) from the apex
    assert np.allclose(np.linalg.norm(chain.centers, axis=1) * math.sin(theta), chain.radii)


def test_cone_chain_rejects_bad_angle():
    with pytest.raises(ValueError):
        g.cone_chain((0.0,), (1.0,), 0.0, 0.1, 5)


def test_nesting_error_is_arithmetic():
    assert issubclass(NestingError, ArithmeticError)


def test_order_certificate_frozen():
    out = g.order_certificate(0.8, 100, 2)
    # L = pi / 900; 0.8^26 = 3.02e-3 < L < 0.8^25 = 3.78e-3
    assert out["L"] == pytest.approx(math.pi / 900, rel=1e-15)
    assert out["m_star"] == 26
    assert out["status"] == "finite_order_bound"


def test_order_certificate_inconclusive_on_steep_samples():
    d = np.geomspace(1e-3, 1e-1, 20)
    out = g.order_certificate(0.8, 100, 2, np.column_stack([d, d**30]))
    assert out["fitted_slope"] == pytest.approx(30, rel=1e-8)
    assert out["status"] == "inconclusive"


@pytest.mark.parametrize("name", ["finite_points", "half_cross"])
def test_outward_ball_found(name):
    scene = g.example_scene(name)
    res = g.outward_ball_search(scene, 0.05)
    assert res.found
    c = np.array(res.center)
    # touching T, avoiding S, inside omega
    assert scene.T.distance(c[None])[0] == pytest.approx(res.radius, abs=1e-12)
    assert scene.singular.distance(c[None])[0] >= res.radius - 1e-12
    assert scene.omega.depth(c[None])[0] >= res.radius - 1e-12


def test_half_cross_ball_frozen():
    res = g.outward_ball_search(g.example_scene("half_cross"), 0.05)
    assert res.center == pytest.approx([-0.5, 0.0])
    assert res.radius == pytest.approx(0.5)


@pytest.mark.parametrize("name", ["axis_cross", "line_family", "dense_cloud"])
@pytest.mark.parametrize("h", [0.1, 0.05])
def test_outward_ball_falsified(name, h):
    scene = g.example_scene(name)
    assert not g.outward_ball_search(scene, h).found
    rep = g.falsify_outward_ball(scene, h=h)
    assert rep.falsified
    assert rep.n_witnessed == rep.n_candidates > 0


def test_falsify_with_explicit_candidates():
    scene = g.example_scene("axis_cross")
    rep = g.falsify_outward_ball(scene, candidate_balls=[((0.3, 0.3), 0.2)])
    assert rep.verdict == "not_falsified"


def test_degenerate_scene_raises():
    scene = g.SingularSetScene(Box((0.0, 0.0), (1.0, 1.0)), g.EmptySet(),
                               g.TestSet(np.zeros((1, 2)), Box((-1.0, -1.0), (2.0, 2.0))))
    with pytest.raises(DegenerateSceneError):
        g.outward_ball_search(scene, 0.1)


def test_scene_json_roundtrip():
    for name in ("finite_points", "axis_cross", "line_family", "c2_curve"):
        scene = g.example_scene(name)
        data = json.loads(json.dumps(scene.to_json()))
        again = g.SingularSetScene.from_json(data)
        X = np.random.default_rng(0).uniform(-1, 1, (50, 2))
        assert np.allclose(again.singular.distance(X), scene.singular.distance(X))
        assert np.allclose(again.T.distance(X), scene.T.distance(X))


def test_porosity():
    assert g.porosity_check(g.example_scene("finite_points"), (0.2, 0.3), [0.2, 0.1, 0.05]).passed
    assert g.porosity_check(g.example_scene("line_family"), (0.25, 0.0), [0.1, 0.05, 0.02]).passed
    assert not g.porosity_check(g.example_scene("dense_cloud"), (0.0, 0.0), [0.4, 0.2]).passed
    with pytest.raises(ValueError):
        g.porosity_check(g.example_scene("finite_points"), (0.2, 0.3), [0.1, 0.2])


def test_c2_curve_distance_against_brute_force():
    curve = g.C2Curve.from_function(lambda t: np.column_stack([t, 0.5 * t**2]), samples=201)
    X = np.random.default_rng(3).uniform(-1, 1, (100, 2))
    dense = np.column_stack([np.linspace(0, 1, 20001), 0.5 * np.linspace(0, 1, 20001) ** 2])
    assert np.allclose(curve.distance(X), brute_distance(dense, X), atol=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=8),
       st.integers(0, 10_000))
def test_finite_points_distance_matches_brute_force(pts, seed):
    P = np.array(pts, dtype=float)
    X = np.random.default_rng(seed).uniform(-2, 2, (20, 2))
    assert np.allclose(g.FinitePoints(P).distance(X), brute_distance(P, X))
    near = g.FinitePoints(P).nearest(X)
    assert np.allclose(np.linalg.norm(near - X, axis=1), brute_distance(P, X))


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-1, 1), y=st.floats(-1, 1))
def test_axis_cross_distance(x, y):
    assert g.AxisCross().distance(np.array([[x, y]]))[0] == pytest.approx(min(abs(x), abs(y)))


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(0.05, math.pi / 2), r0=st.floats(1e-3, 1.0))
def test_cone_chain_property(theta, r0):
    chain = g.cone_chain((0.0, 0.0, 0.0), (1.0, 1.0, 0.0), theta, r0, 10)
    assert np.all(chain.nesting_margins >= -1e-12 * r0)
    assert np.all(np.diff(chain.radii) < 0)
