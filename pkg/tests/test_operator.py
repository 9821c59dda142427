import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpplab.domains import Ball
from bpplab.errors import DerivativeUnavailableError
from bpplab.operator import (FAMILIES, AnalyticField, OperatorCoefficients, QuasilinearData,
                             adversarial_coefficients, coefficient_family, ellipticity_check,
                             growth_check, lower_lipschitz_check, quasilinear_reduce,
                             reduction_bounds)
from bpplab.weightfn import RadialWeight

BALL2 = Ball((0.0, 0.0), 1.0)


def quadratic(n):
    return AnalyticField(n, lambda X: (X**2).sum(axis=1), lambda X: 2 * X,
                         lambda X: np.broadcast_to(2 * np.eye(n), (len(X), n, n)), "quadratic")


def test_apply_laplacian_of_quadratic():
    L = coefficient_family("laplacian", 3, Ball((0.0,) * 3, 1.0), RadialWeight.constant(1.0))
    X = np.random.default_rng(0).uniform(-0.5, 0.5, (10, 3))
    assert np.allclose(L.apply(quadratic(3), X), 6.0)


def test_missing_hessian_raises():
    f = AnalyticField(2, lambda X: X[:, 0])
    L = coefficient_family("laplacian", 2, BALL2, RadialWeight.constant(1.0))
    with pytest.raises(DerivativeUnavailableError):
        L.apply(f, np.zeros((1, 2)))


def test_asymmetric_principal_part_rejected():
    coeffs = OperatorCoefficients(2, lambda X: np.array([[1.0, 1.0], [0.0, 1.0]]),
                                  lambda X: np.zeros((len(X), 2)), lambda X: np.zeros(len(X)))
    with pytest.raises(ValueError):
        coeffs.evaluate(np.zeros((3, 2)))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("weight", [RadialWeight.constant(1.0), RadialWeight.power(2.0, 0.5)],
                         ids=["constant", "power"])
def test_adversarial_saturates_bounds(n, weight):
    cert = adversarial_coefficients(n, Ball((0.0,) * n, 1.0), weight, max_depth=0.25,
                                    n_samples=3000).certificate
    assert cert.passed
    for key in ("ellipticity", "b_bound", "c_bound"):
        assert abs(cert.worst_margin[key]) <= 1e-12
    if n > 1:
        assert abs(cert.worst_margin["a_upper"]) <= 1e-12


def test_overgrowth_margin_frozen():
    # margin of c = -w/d^1.5 against -w/d is 1 - d^(-1/2); at the guard d = 1e-8 this is 1 - 1e4
    w = RadialWeight.power(2.0, 0.5)
    over = coefficient_family("c_overgrowth", 2, BALL2, w)
    cert = growth_check(over, w, BALL2, n_samples=500, guard=1e-8)
    assert not cert.checks["c_bound"]
    assert cert.worst_margin["c_bound"] == pytest.approx(1 - 1e4, rel=1e-7)


@pytest.mark.parametrize("name,passes", [("laplacian", True), ("singular_c", True),
                                         ("diag_bump", False), ("c_violating", False),
                                         ("c_overgrowth", False)])
def test_family_certificates(name, passes):
    w = RadialWeight.power(2.0, 0.5)
    coeffs = coefficient_family(name, 2, BALL2, w)
    assert growth_check(coeffs, w, BALL2, n_samples=1000).passed is passes


def test_all_families_build():
    w = RadialWeight.constant(1.0)
    for name in FAMILIES:
        A, b, c = coefficient_family(name, 2, BALL2, w).evaluate(np.array([[0.1, 0.2]]))
        assert A.shape == (1, 2, 2) and b.shape == (1, 2) and c.shape == (1,)


def test_scaled_identity_fails_lower_ellipticity_for_small_weight():
    w = RadialWeight.constant(0.5)
    coeffs = coefficient_family("scaled_identity", 2, BALL2, w)
    rep = ellipticity_check(coeffs, np.array([[0.1, 0.0]]), w, BALL2)
    assert rep.lower_margin == pytest.approx(-0.5)
    assert not rep.passed


def test_lower_lipschitz_pass_and_fail():
    w = RadialWeight.constant(1.0)
    eye = np.eye(2)
    A = lambda X, Z, E: np.broadcast_to(eye, (len(X), 2, 2))  # noqa: E731
    good = QuasilinearData(2, A, lambda X, Z, E: -np.asarray(Z) / BALL2.depth(X))
    bad = QuasilinearData(2, A, lambda X, Z, E: -np.asarray(Z) / BALL2.depth(X) ** 2)
    assert lower_lipschitz_check(good, w, BALL2, (1.0, 1.0), n_samples=3000).B_passed
    assert not lower_lipschitz_check(bad, w, BALL2, (1.0, 1.0), n_samples=3000).B_passed


def test_quasilinear_reduction_bounds():
    w = RadialWeight.constant(1.0)
    eye = np.eye(2)
    q = QuasilinearData(2, lambda X, Z, E: np.broadcast_to(eye, (len(X), 2, 2)),
                        lambda X, Z, E: -np.asarray(Z) / BALL2.depth(X))
    u = AnalyticField(2, lambda X: np.zeros(len(X)), lambda X: np.zeros((len(X), 2)),
                      lambda X: np.zeros((len(X), 2, 2)))
    v = quadratic(2)
    X = np.random.default_rng(1).uniform(-0.6, 0.6, (200, 2))
    out = reduction_bounds(q, u, v, w, BALL2, X)
    assert out["hessian_sup"] == 2.0
    assert out["lambda_factor"] == 9.0
    assert out["bound_holds"] and out["b_within_factor"]
    red = quasilinear_reduce(q, u, v, w, BALL2)
    A, _, _ = red.evaluate(X)
    assert np.allclose(A, eye)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 3), c=st.floats(1.0, 4.0), alpha=st.floats(0.05, 0.9),
       seed=st.integers(0, 1000))
def test_adversarial_certificate_property(n, c, alpha, seed):
    w = RadialWeight.power(c, alpha)
    cert = adversarial_coefficients(n, Ball((0.0,) * n, 1.0), w, max_depth=0.2,
                                    n_samples=300, seed=seed).certificate
    assert cert.passed
    assert cert.dumps() == adversarial_coefficients(n, Ball((0.0,) * n, 1.0), w, max_depth=0.2,
                                                    n_samples=300, seed=seed).certificate.dumps()
