"""
Comparison functions on a thin shell
====================================

Build the radial comparison function for a singular weight, then check that
it stays a strict subsolution against the worst coefficients the growth
bounds allow.
"""
import numpy as np

from bpplab import Ball, Barrier, RadialWeight, adversarial_coefficients, residual_check

weight = RadialWeight.power(2.0, 0.5)  # blows up like d^(-1/2) at the sphere
b = Barrier.build(n=2, R=1.0, m=1.0, weight=weight)
print(f"k = {b.k:g}, shell width eps = {b.eps:.3e}, f(eps) = {b.f_at_eps:.6e}")
print(f"outward normal derivative = {b.normal_derivative():.4f}")

# the profile falls from m on the inner sphere to 0 on the outer one
for t in np.linspace(0.0, 1.0, 5):
    r = 1.0 - t * b.eps
    v, _ = b.barrier_eval(np.array([r, 0.0]))
    print(f"  |x| = {r:.6f}   v = {v:.6f}")

# a = stretched identity, |b| = weight, c = -weight/d: every bound is attained
coeffs = adversarial_coefficients(2, Ball((0.0, 0.0), 1.0), weight, max_depth=b.eps)
print("growth certificate margins:", coeffs.certificate.worst_margin)
rep = residual_check(b, coeffs, count=10_000)
print(f"min of L[v] - weight over 10^4 graded samples: {rep.min_residual:.4e} (pass={rep.passed})")
