"""Linear elliptic coefficients, weight-growth certificates and the
quasi-linear to linear reduction.

Coefficient maps are vectorised: each takes an ``(N, n)`` array of points
and returns ``a -> (N, n, n)``, ``b -> (N, n)``, ``c -> (N,)``.

Margins reported by the checks are normalised by ``max(1, |bound|)`` so that
saturated bounds give margins at rounding level even where the weight is
huge; a check passes when its worst margin is at least ``-1e-10``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .domains import Ball, as_points
from .errors import DerivativeUnavailableError
from .sampling import GUARD, make_rng, shell_samples, unit_directions
from .weightfn import RadialWeight

PASS_TOL = 1e-10
SYM_TOL = 1e-12
QUOTIENT_GUARD = 1e-14


def _scale(bound):
    return np.maximum(1.0, np.abs(bound))


@dataclass(frozen=True)
class AnalyticField:
    """A scalar function with closed-form derivatives, vectorised over points."""

    n: int
    value: Callable
    grad: Optional[Callable] = None
    hess: Optional[Callable] = None
    name: str = ""

    def require_hessian(self):
        if self.grad is None or self.hess is None:
            raise DerivativeUnavailableError(f"field {self.name or '<anonymous>'} has no second derivatives")


@dataclass(frozen=True)
class GrowthCertificate:
    weight: RadialWeight
    ball: Ball
    checks: dict
    worst_margin: dict
    n_samples: int
    max_depth: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self):
        return {"weight": self.weight.to_json(), "ball": self.ball.to_json(),
                "checks": dict(self.checks), "worst_margin": dict(self.worst_margin),
                "n_samples": self.n_samples, "max_depth": self.max_depth,
                "pass": self.passed}

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class OperatorCoefficients:
    n: int
    a: Callable
    b: Callable
    c: Callable
    domain: object = None
    certificate: Optional[GrowthCertificate] = None
    name: str = ""

    def evaluate(self, X):
        """Return ``(A, b, c)`` at the points ``X``; ``A`` is symmetrised."""
        X = as_points(X, self.n)
        N = len(X)
        A = np.broadcast_to(np.asarray(self.a(X), dtype=float), (N, self.n, self.n))
        skew = np.abs(A - A.transpose(0, 2, 1))
        if skew.size and skew.max() > SYM_TOL * max(1.0, np.abs(A).max()):
            raise ValueError(f"principal coefficients not symmetric (discrepancy {skew.max():.3e})")
        A = 0.5 * (A + A.transpose(0, 2, 1))
        b = np.broadcast_to(np.asarray(self.b(X), dtype=float), (N, self.n))
        c = np.broadcast_to(np.asarray(self.c(X), dtype=float), (N,))
        return A, b, c

    def apply(self, u: AnalyticField, X):
        """``L[u]`` at ``X`` using the field's analytic derivatives."""
        u.require_hessian()
        X = as_points(X, self.n)
        A, b, c = self.evaluate(X)
        H, G, V = u.hess(X), u.grad(X), u.value(X)
        return np.einsum("nij,nij->n", A, H) + np.einsum("ni,ni->n", b, G) + c * V

    def with_certificate(self, cert):
        return replace(self, certificate=cert)


@dataclass(frozen=True)
class EllipticityReport:
    lower_margin: float
    upper_margin: float
    lower_argmin: list
    upper_argmin: list
    n_samples: int
    n_directions: int

    @property
    def lower_passed(self):
        return self.lower_margin >= -PASS_TOL

    @property
    def upper_passed(self):
        return self.upper_margin >= -PASS_TOL

    @property
    def passed(self):
        return self.lower_passed and self.upper_passed

    def to_json(self):
        return {"lower_margin": self.lower_margin, "upper_margin": self.upper_margin,
                "lower_argmin": self.lower_argmin, "upper_argmin": self.upper_argmin,
                "n_samples": self.n_samples, "n_directions": self.n_directions,
                "pass": self.passed}


def default_directions(n, n_random=100, seed=0):
    """Axis vectors followed by ``n_random`` random unit vectors."""
    return np.vstack([np.eye(n), unit_directions(make_rng(seed), n_random, n)])


def ellipticity_check(coeffs, samples, weight, ball, directions=None, seed=0):
    """Margins of ``|y|^2 <= y.a(x)y <= weight(d(x))|y|^2``.

    ``d(x)`` is the distance to the sphere of ``ball``. The sampled
    directions are complemented by the extreme eigenvalues of ``a(x)``,
    which bound the quadratic form over every unit ``y``. The lower margin
    is normalised by ``max(1, largest eigenvalue)``.
    """
    X = as_points(samples, coeffs.n)
    Y = default_directions(coeffs.n, seed=seed) if directions is None else np.asarray(directions, float)
    Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    A, _, _ = coeffs.evaluate(X)
    lam = weight.eval(ball.depth(X))
    q = np.einsum("ki,nij,kj->nk", Y, A, Y)
    eig = np.linalg.eigvalsh(A)
    # rounding in the form scales with the largest eigenvalue
    lower = (np.minimum(q.min(axis=1), eig[:, 0]) - 1.0) / _scale(eig[:, -1])
    upper = (lam - np.maximum(q.max(axis=1), eig[:, -1])) / _scale(lam)
    il, iu = int(np.argmin(lower)), int(np.argmin(upper))
    return EllipticityReport(float(lower[il]), float(upper[iu]), X[il].tolist(), X[iu].tolist(),
                             len(X), len(Y))


def growth_check(coeffs, weight, ball, n_samples=10_000, seed=0, max_depth=None, guard=GUARD):
    """Sample the ellipticity, drift and zeroth-order growth bounds on ``ball``.

    With ``d`` the distance to the sphere of ``ball``, the bounds are
    ``|y|^2 <= y.a y <= weight(d)|y|^2``, ``|b_i| <= weight(d)`` and
    ``c >= -weight(d)/d``. Samples are graded toward the sphere; with
    ``max_depth`` they are restricted to the collar ``d <= max_depth``.
    Failures are recorded in the certificate, never raised.
    """
    rng = make_rng(seed)
    X, _ = shell_samples(rng, n_samples, ball.center, ball.radius, max_depth=max_depth, guard=guard)
    d = ball.depth(X)
    lam = weight.eval(d)
    ell = ellipticity_check(coeffs, X, weight, ball, seed=rng)
    _, b, c = coeffs.evaluate(X)
    b_margin = (lam - np.abs(b).max(axis=1)) / _scale(lam)
    c_bound = -lam / d
    c_margin = (c - c_bound) / _scale(c_bound)
    worst = {"ellipticity": ell.lower_margin, "a_upper": ell.upper_margin,
             "b_bound": float(b_margin.min()), "c_bound": float(c_margin.min())}
    checks = {k: bool(v >= -PASS_TOL) for k, v in worst.items()}
    return GrowthCertificate(weight, ball, checks, worst, n_samples, max_depth)


def certify(coeffs, weight, ball, **kwargs):
    """Run :func:`growth_check` and attach the certificate to ``coeffs``."""
    return coeffs.with_certificate(growth_check(coeffs, weight, ball, **kwargs))


def _unit_radial(X, center):
    rel = X - center
    norm = np.linalg.norm(rel, axis=1, keepdims=True)
    out = np.zeros_like(rel)
    out[:, 0] = 1.0
    nz = norm[:, 0] > 0
    out[nz] = rel[nz] / norm[nz]
    return out


def adversarial_coefficients(n, ball, weight, tangential_stretch=True, b_sign=1.0,
                             max_depth=None, n_samples=10_000, seed=0):
    """Coefficients that saturate every growth bound.

    ``a`` equals 1 along the radial direction and ``max(weight, 1)`` across
    it (the identity when ``tangential_stretch`` is off); ``b_i =
    b_sign * weight(d) * sign(x_i - x0_i)`` and ``c = -weight(d)/d``. The
    default ``b_sign = +1`` makes ``b . x`` positive, which is the harmful
    sign for a profile that decreases toward the sphere.
    """
    x0 = np.asarray(ball.center)
    eye = np.eye(n)

    def depth_weight(X):
        d = ball.depth(X)
        return d, weight.eval(d)

    def a(X):
        _, lam = depth_weight(X)
        if not tangential_stretch:
            return np.broadcast_to(eye, (len(X), n, n))
        e = _unit_radial(X, x0)
        s = np.maximum(lam - 1.0, 0.0)
        return eye + s[:, None, None] * (eye - np.einsum("ni,nj->nij", e, e))

    def b(X):
        _, lam = depth_weight(X)
        return b_sign * lam[:, None] * np.sign(X - x0)

    def c(X):
        d, lam = depth_weight(X)
        return -lam / d

    coeffs = OperatorCoefficients(n, a, b, c, domain=ball, name="adversarial")
    return certify(coeffs, weight, ball, n_samples=n_samples, seed=seed, max_depth=max_depth)


def coefficient_family(name, n, ball, weight, **params):
    """Named coefficient families, e.g. for configuration files.

    ``laplacian``, ``adversarial``, ``scaled_identity`` (``a = weight * I``),
    ``diag_bump`` (``a = diag(1, 1 + weight, 1, ...)``), ``c_overgrowth``
    (``c = -weight/d**p`` with ``p`` default 1.5), ``c_violating``
    (``c = -2 weight/d**2``) and ``singular_c`` (``a = I``, ``b = 0``,
    ``c = -weight/d``).
    """
    eye = np.eye(n)
    zero_b = lambda X: np.zeros((len(X), n))  # noqa: E731
    zero_c = lambda X: np.zeros(len(X))  # noqa: E731
    ident = lambda X: np.broadcast_to(eye, (len(X), n, n))  # noqa: E731

    def lam(X):
        return weight.eval(ball.depth(X))

    if name == "adversarial":
        return adversarial_coefficients(n, ball, weight, **params)
    if name == "laplacian":
        a, b, c = ident, zero_b, zero_c
    elif name == "singular_c":
        a, b = ident, zero_b
        c = lambda X: -lam(X) / ball.depth(X)  # noqa: E731
    elif name == "scaled_identity":
        a, b, c = (lambda X: lam(X)[:, None, None] * eye), zero_b, zero_c
    elif name == "diag_bump":
        if n < 2:
            raise ValueError("diag_bump needs n >= 2")

        def a(X):
            A = np.broadcast_to(eye, (len(X), n, n)).copy()
            A[:, 1, 1] += lam(X)
            return A
        b, c = zero_b, zero_c
    elif name == "c_overgrowth":
        p = float(params.pop("p", 1.5))
        a, b = ident, zero_b
        c = lambda X: -lam(X) / ball.depth(X) ** p  # noqa: E731
    elif name == "c_violating":
        a, b = ident, zero_b
        c = lambda X: -2 * lam(X) / ball.depth(X) ** 2  # noqa: E731
    else:
        raise ValueError(f"unknown coefficient family {name!r}")
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    return OperatorCoefficients(n, a, b, c, domain=ball, name=name)


FAMILIES = ("laplacian", "adversarial", "singular_c", "scaled_identity",
            "diag_bump", "c_overgrowth", "c_violating")


# -- quasi-linear operators ------------------------------------------------

@dataclass(frozen=True)
class QuasilinearData:
    """Quasi-linear operator data.

    ``form="nondivergence"``: ``A(X, z, eta) -> (N, n, n)`` and
    ``Q[u] = sum A_ij(x, u, Du) u_ij + B(x, u, Du)``.

    ``form="divergence"``: ``A(X, z, eta) -> (N, n)`` and
    ``Q[u] = div A(x, u, Du) + B(x, u, Du)``; the partial derivatives
    ``A_eta -> (N, n, n)``, ``A_z -> (N, n)`` and the explicit divergence
    ``A_x -> (N,)`` (zero when omitted) expand the divergence for ``C^2``
    fields.
    """

    n: int
    A: Callable
    B: Callable
    form: str = "nondivergence"
    A_eta: Optional[Callable] = None
    A_z: Optional[Callable] = None
    A_x: Optional[Callable] = None
    bounds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.form not in ("nondivergence", "divergence"):
            raise ValueError(f"unknown form {self.form!r}")
        if self.form == "divergence" and self.A_eta is None:
            raise ValueError("divergence form needs the Jacobian A_eta")

    def principal(self, X, Z, ETA):
        """The matrix multiplying the Hessian: ``A`` or ``A_eta``."""
        if self.form == "nondivergence":
            return np.asarray(self.A(X, Z, ETA), dtype=float)
        return np.asarray(self.A_eta(X, Z, ETA), dtype=float)

    def lower_order(self, X, Z, ETA):
        """Everything in ``Q`` that does not multiply the Hessian."""
        out = np.asarray(self.B(X, Z, ETA), dtype=float)
        if self.form == "divergence":
            if self.A_z is not None:
                out = out + np.einsum("ni,ni->n", np.asarray(self.A_z(X, Z, ETA)), ETA)
            if self.A_x is not None:
                out = out + np.asarray(self.A_x(X, Z, ETA))
        return out

    def apply(self, u: AnalyticField, X):
        u.require_hessian()
        X = as_points(X, self.n)
        Z, ETA, H = u.value(X), u.grad(X), u.hess(X)
        return np.einsum("nij,nij->n", self.principal(X, Z, ETA), H) + self.lower_order(X, Z, ETA)

    def to_nondivergence(self):
        if self.form == "nondivergence":
            return self
        return QuasilinearData(self.n, self.principal, self.lower_order, bounds=dict(self.bounds))


def quasilinear_reduce(q: QuasilinearData, u: AnalyticField, v: AnalyticField, weight, ball):
    """Linear coefficients governing ``w = u - v`` near the sphere of ``ball``.

    With ``d`` the distance to that sphere and ``s_i = sign(w_i)``
    (``sign(0) = 0``)::

        a_ij = A_ij(x, u, Du)
        b_i  = weight(d) * s_i * (1 + sum_kl |v_kl|)
        c    = weight(d)/d * sign(w) * sum_kl |v_kl|
               + (B(x, u, Dv) - B(x, v, Dv)) / (u - v)

    Where ``|u - v| < 1e-14`` the difference quotient is replaced by its
    admissible lower bound ``-weight(d)/d``.
    """
    u.require_hessian()
    v.require_hessian()
    qn = q.to_nondivergence()
    n = q.n

    def parts(X):
        d = ball.depth(X)
        lam = weight.eval(d)
        U, DU = u.value(X), u.grad(X)
        V, DV, HV = v.value(X), v.grad(X), v.hess(X)
        return d, lam, U, DU, V, DV, np.abs(HV).sum(axis=(1, 2))

    def a(X):
        return qn.principal(X, u.value(X), u.grad(X))

    def b(X):
        _, lam, _, DU, _, DV, hsum = parts(X)
        return (lam * (1 + hsum))[:, None] * np.sign(DU - DV)

    def c(X):
        d, lam, U, DU, V, DV, hsum = parts(X)
        diff = U - V
        close = np.abs(diff) < QUOTIENT_GUARD
        safe = np.where(close, 1.0, diff)
        quotient = (qn.B(X, U, DV) - qn.B(X, V, DV)) / safe
        quotient = np.where(close, -lam / d, quotient)
        return lam / d * np.sign(diff) * hsum + quotient

    return OperatorCoefficients(n, a, b, c, domain=ball, name="quasilinear_reduction")


def reduction_bounds(q, u, v, weight, ball, X):
    """Lower bound for the reduced zeroth-order coefficient and the weight factor.

    Returns the sampled Hessian supremum of ``v``, the factor
    ``1 + n^2 sup|v_kl|`` by which the weight must be multiplied for the
    reduced coefficients to obey the growth bounds, the reduced ``c``
    values and the bound ``-(weight(d)/d)(n^2 sup|v_kl| + 1)``.
    """
    X = as_points(X, q.n)
    red = quasilinear_reduce(q, u, v, weight, ball)
    _, b, c = red.evaluate(X)
    d = ball.depth(X)
    lam = weight.eval(d)
    hsup = float(np.abs(v.hess(X)).max())
    factor = 1 + q.n**2 * hsup
    bound = -(lam / d) * factor
    return {"hessian_sup": hsup, "lambda_factor": factor, "c": c, "c_lower_bound": bound,
            "bound_holds": bool(np.all(c >= bound - 1e-12 * _scale(bound))),
            "b_within_factor": bool(np.all(np.abs(b) <= lam[:, None] * factor * (1 + 1e-12)))}


def _perturbation_samples(rng, X, box, n):
    """``(z1 >= z2, eta1, eta2)`` tuples: a third vary z only, a third eta only, a third both."""
    Mz, Meta = box
    N = len(X)
    z = np.sort(rng.uniform(-Mz, Mz, size=(N, 2)), axis=1)[:, ::-1]
    e1 = rng.uniform(-Meta, Meta, size=(N, n))
    e2 = rng.uniform(-Meta, Meta, size=(N, n))
    third = N // 3
    e2[:third] = e1[:third]
    z[third:2 * third, 1] = z[third:2 * third, 0]
    return z[:, 0], z[:, 1], e1, e2


@dataclass(frozen=True)
class LipschitzReport:
    A_margin: float
    B_margin: float
    A_argmin: list
    B_argmin: list
    n_samples: int

    @property
    def A_passed(self):
        return self.A_margin >= -PASS_TOL

    @property
    def B_passed(self):
        return self.B_margin >= -PASS_TOL

    def to_json(self):
        return {"A_margin": self.A_margin, "B_margin": self.B_margin,
                "A_argmin": self.A_argmin, "B_argmin": self.B_argmin,
                "A_pass": self.A_passed, "B_pass": self.B_passed, "n_samples": self.n_samples}


def lipschitz_terms(q: QuasilinearData, ball, X, box, rng):
    """Per-sample quantities entering the weighted Lipschitz conditions.

    Returns ``(d, scale, dA, dB)`` where ``scale = |z1-z2|/d + sum|eta1-eta2|``,
    ``dA = max_ij |A_ij(1) - A_ij(2)|`` (principal part) and
    ``dB = B(1) - B(2)`` for ``z1 >= z2``.
    """
    qn = q.to_nondivergence()
    d = ball.depth(X)
    z1, z2, e1, e2 = _perturbation_samples(rng, X, box, q.n)
    scale = (z1 - z2) / d + np.abs(e1 - e2).sum(axis=1)
    dA = np.abs(qn.principal(X, z1, e1) - qn.principal(X, z2, e2)).max(axis=(1, 2))
    dB = np.asarray(q.B(X, z1, e1)) - np.asarray(q.B(X, z2, e2))
    return d, scale, dA, dB


def lower_lipschitz_check(q: QuasilinearData, weight, ball, box, n_samples=10_000, seed=0,
                          max_depth=None, guard=1e-9):
    """Sample the weighted Lipschitz bound on ``A`` and lower bound on ``B``.

    ``box = (M_z, M_eta)``. The conditions are
    ``|A_ij(1) - A_ij(2)| <= weight(d)(|z1-z2|/d + sum|eta1-eta2|)`` and
    ``B(1) - B(2) >= -weight(d)((z1-z2)/d + sum|eta1-eta2|)`` for
    ``z1 >= z2``.
    """
    rng = make_rng(seed)
    X, _ = shell_samples(rng, n_samples, ball.center, ball.radius, max_depth=max_depth, guard=guard)
    d, scale, dA, dB = lipschitz_terms(q, ball, X, box, rng)
    bound = weight.eval(d) * scale
    mA = (bound - dA) / _scale(bound)
    mB = (dB + bound) / _scale(bound)
    iA, iB = int(np.argmin(mA)), int(np.argmin(mB))
    return LipschitzReport(float(mA[iA]), float(mB[iB]), X[iA].tolist(), X[iB].tolist(), len(X))
