"""Numerical lab for boundary point principles of elliptic operators.

Submodules
----------
weightfn
    Radial weights and their iterated integrals.
barrier
    Comparison functions on thin shells and their residual checks.
operator
    Coefficient fields, growth certificates and quasilinear reduction.
geometry
    Singular sets, outward balls, porosity and cone chains.
fdlab
    Finite-difference maximum principle and boundary slope experiments.
counterexamples
    Executable counter-examples with hypothesis and conclusion checks.
cli
    The ``bpplab`` command.
"""
from .barrier import Barrier, compute_k, residual_check
from .counterexamples import CASES, instantiate, verify, zero_order_estimate
from .domains import Annulus, Ball, Box
from .errors import (CaseMismatchError, DegenerateSceneError, DerivativeUnavailableError,
                     DivergenceError, DomainError, NestingError, NotFoundError, SolverError)
from .fdlab import PolarAnnulus, csmp_check, hopf_quotient, solve_dirichlet
from .geometry import (SingularSetScene, cone_chain, cone_ratio, example_scene,
                       falsify_outward_ball, order_certificate, outward_ball_search)
from .operator import (AnalyticField, OperatorCoefficients, QuasilinearData,
                       adversarial_coefficients, coefficient_family, growth_check)
from .weightfn import RadialWeight

__version__ = "0.1.0"

__all__ = [
    "AnalyticField", "Annulus", "Ball", "Barrier", "Box", "CASES", "CaseMismatchError",
    "DegenerateSceneError", "DerivativeUnavailableError", "DivergenceError", "DomainError",
    "NestingError", "NotFoundError", "OperatorCoefficients", "PolarAnnulus", "QuasilinearData",
    "RadialWeight", "SingularSetScene", "SolverError", "adversarial_coefficients",
    "coefficient_family", "compute_k", "cone_chain", "cone_ratio", "csmp_check",
    "example_scene", "falsify_outward_ball", "growth_check", "hopf_quotient", "instantiate",
    "order_certificate", "outward_ball_search", "residual_check", "solve_dirichlet", "verify",
    "zero_order_estimate",
]
