import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpplab.barrier import Barrier, admissible_epsilon, compute_k, residual_check, shell_points
from bpplab.domains import Ball
from bpplab.errors import DomainError
from bpplab.operator import adversarial_coefficients, coefficient_family
from bpplab.weightfn import RadialWeight


def test_k_frozen():
    assert compute_k(2, 2.0) == 11.0
    assert compute_k(1, 0.5) == 13.0


def test_constant_weight_barrier_frozen():
    # f(eps) = eps + k eps^2/2 = 0.05 + 11 * 0.00125
    b = Barrier(2, 2.0, 0.05, 1.0, RadialWeight.constant(1.0))
    assert b.f_at_eps == pytest.approx(0.06375, rel=1e-14)
    assert b.normal_derivative() == pytest.approx(-1 / 0.06375, rel=1e-14)
    v, grad = b.barrier_eval(np.array([1.975, 0.0]))
    r = 0.025
    assert v == pytest.approx((r + 5.5 * r**2) / 0.06375, rel=1e-14)
    assert grad[0] == pytest.approx(-(1 + 11 * r) / 0.06375, rel=1e-14)


def test_power_weight_barrier_frozen():
    b = Barrier(1, 1.0, 5e-4, 2.0, RadialWeight.power(2.0, 0.5))
    k = 2 * (2 + 1) + 3
    f_eps = 5e-4 + k * (8 / 3) * 5e-4**1.5
    assert b.f_at_eps == pytest.approx(f_eps, rel=1e-14)


def test_admissible_epsilon_constraint():
    w = RadialWeight.power(1.0, 0.5)
    eps = admissible_epsilon(2, 1.0, w)
    assert w.integrate_first(eps) < 1 / compute_k(2, 1.0)
    assert 0 < eps < 0.5


def test_boundary_values_and_shell_guard():
    b = Barrier.build(3, 1.5, 2.0, RadialWeight.power(1.5, 0.3))
    e = np.array([0.0, 1.0, 0.0])
    assert b.barrier_eval(1.5 * e)[0] == 0.0
    assert b.barrier_eval((1.5 - b.eps) * e)[0] == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(DomainError):
        b.barrier_eval(1.6 * e)
    with pytest.raises(DomainError):
        b.f_eval(2 * b.eps)


def test_invalid_shell_rejected():
    with pytest.raises(ValueError):
        Barrier(2, 2.0, 0.5, 1.0, RadialWeight.constant(1.0))
    with pytest.raises(ValueError):
        Barrier(2, 2.0, 0.05, -1.0, RadialWeight.constant(1.0))


def test_normal_derivative_matches_finite_difference():
    b = Barrier.build(2, 1.0, 1.0, RadialWeight.constant(2.0))
    h = 1e-6
    x = np.array([[1.0, 0.0], [1.0 - h, 0.0]])
    v, _ = b.barrier_eval(x)
    assert (v[0] - v[1]) / h == pytest.approx(b.normal_derivative(), rel=1e-4)


def test_residual_check_adversarial_and_uncertified_warning():
    w = RadialWeight.power(2.0, 0.5)
    b = Barrier.build(2, 1.0, 1.0, w)
    ball = Ball((0.0, 0.0), 1.0)
    coeffs = adversarial_coefficients(2, ball, w, max_depth=b.eps, n_samples=2000)
    rep = residual_check(b, coeffs, count=2000)
    assert rep.passed and rep.certified and rep.min_residual > 0
    with pytest.warns(UserWarning):
        rep = residual_check(b, coefficient_family("laplacian", 2, ball, w), count=500)
    assert not rep.certified


def test_shell_points_in_shell():
    b = Barrier.build(2, 1.0, 1.0, RadialWeight.constant(1.0))
    r = np.linalg.norm(shell_points(b, count=500), axis=1)
    assert np.all(r <= 1.0) and np.all(r >= 1.0 - b.eps)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 3), R=st.floats(0.5, 4.0), m=st.floats(0.1, 10.0),
       c=st.floats(1.0, 3.0), alpha=st.floats(0.05, 0.7), t=st.floats(0.0, 1.0))
def test_barrier_monotone_between_bounds(n, R, m, c, alpha, t):
    b = Barrier.build(n, R, m, RadialWeight.power(c, alpha))
    e = np.eye(n)[0]
    r = R - t * b.eps
    v, grad = b.barrier_eval(r * e)
    assert -1e-12 <= v <= m * (1 + 1e-12)
    # v decreases outward
    assert grad @ e < 0


@settings(max_examples=15, deadline=None)
@given(n=st.integers(1, 3), R=st.floats(0.5, 4.0), lam=st.floats(1.0, 4.0), seed=st.integers(0, 99))
def test_residual_nonnegative_against_adversarial(n, R, lam, seed):
    w = RadialWeight.constant(lam)
    b = Barrier.build(n, R, 1.0, w)
    coeffs = adversarial_coefficients(n, Ball((0.0,) * n, R), w, max_depth=b.eps,
                                      n_samples=500, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = residual_check(b, coeffs, count=1000, seed=seed)
    assert rep.min_residual >= -1e-8
    assert math.isfinite(rep.min_residual)


def test_gradient_matches_central_differences():
    b = Barrier.build(3, 2.0, 1.5, RadialWeight.power(1.2, 0.4))
    rng = np.random.default_rng(0)
    dirs = rng.standard_normal((20, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    X = (2.0 - rng.uniform(0.2, 0.8, (20, 1)) * b.eps) * dirs
    _, grad = b.barrier_eval(X)
    h = 1e-6
    fd = np.column_stack([(b.barrier_eval(X + h * e)[0] - b.barrier_eval(X - h * e)[0]) / (2 * h)
                          for e in np.eye(3)])
    assert np.abs(fd - grad).max() <= 1e-6 * b.scale
