"""
How fast does a zero vanish?
============================

Log-log slopes over geometric distances separate polynomial zeros from
flat ones, and the cone chain turns a weak Harnack constant into an upper
bound on any finite order.
"""
import math

import numpy as np

from bpplab import cone_ratio, order_certificate, zero_order_estimate

for label, w in (("d^3", lambda d: d**3), ("d^1.5", lambda d: d**1.5),
                 ("exp(-1/d)", lambda d: np.exp(-1 / d))):
    est = zero_order_estimate(w)
    shown = "numerically infinite" if est.numerically_infinite else f"{est.order:.3f}"
    print(f"{label:10s} order {shown}   (last window slopes {np.round(est.slopes[-3:], 2)})")

for theta in (math.pi / 6, math.pi / 4, math.pi / 2):
    kappa = cone_ratio(theta)
    cert = order_certificate(kappa, C=100, n=2)
    print(f"theta = {theta:.4f}: kappa = {kappa:.6f}, m* = {cert['m_star']}")
