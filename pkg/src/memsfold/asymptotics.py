"""Closed-form evaluators for the asymptotic expansions of the fold structure.

Each evaluator computes exactly the stated truncation; remainder terms are
never modeled with fitted coefficients.  Comparison against numerics happens
in the CLI/test harnesses, not here.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError

SQ32 = np.sqrt(1.5)
SQ3 = np.sqrt(3.0)
SQ6 = np.sqrt(6.0)


@dataclass(frozen=True)
class Expansion:
    """An evaluated truncated expansion and the order of its remainder."""
    name: str
    value: float
    validity: str


def lambda_star_lower(eps):
    """Lower-fold location: (3/4)*eps - (sqrt(3/2) + 9/8)*eps^2*ln(eps)."""
    if not 0.0 < eps < 1.0:
        raise ParameterDomainError("lambda_star_lower requires 0 < eps < 1")
    return 0.75 * eps - (SQ32 + 9.0 / 8.0) * eps * eps * np.log(eps)


def norm_upper(eps, lam):
    """Upper-branch squared norm: 2*(1 - (sqrt(3)/3)*sqrt(eps/lam) - 2*eps)."""
    if lam < 0.75 * eps or lam <= 0.0:
        raise ParameterDomainError("norm_upper requires lam >= (3/4) eps > 0")
    return 2.0 * (1.0 - (SQ3 / 3.0) * np.sqrt(eps / lam) - 2.0 * eps)


def xi1_out_expansion(delta, eps):
    """Exit position of the outer-chart transition:
    -1 + (sqrt(3)/2)*delta - (3*sqrt(3)/8)*delta*eps*ln(eps)."""
    return -1.0 + (SQ3 / 2.0) * delta - (3.0 * SQ3 / 8.0) * delta * eps * np.log(eps)


def bifeq_delta(dw, eps):
    """Fold-region bifurcation relation:
    ddelta = -dw + (2*sqrt(2)/3)*eps*ln(dw) + (sqrt(3)/2)*eps*ln(eps).

    Accepts complex dw (real part positive) so callers can take exact
    complex-step derivatives.
    """
    if np.real(dw) <= 0.0:
        raise ParameterDomainError("bifeq_delta requires Re(dw) > 0")
    if eps <= 0.0:
        raise ParameterDomainError("bifeq_delta requires eps > 0")
    return -dw + (2.0 * np.sqrt(2.0) / 3.0) * eps * np.log(dw) \
        + (SQ3 / 2.0) * eps * np.log(eps)


def bifeq_minimizer(eps):
    """Exact stationary point of the truncated relation: dw* = (2*sqrt(2)/3)*eps."""
    if eps <= 0.0:
        raise ParameterDomainError("bifeq_minimizer requires eps > 0")
    return (2.0 * np.sqrt(2.0) / 3.0) * eps


def fold_slope(eps):
    """d||u||^2/dlam at the lower fold:
    8/(9*eps) + (2/9)*(9+4*sqrt(6))*ln(eps) + (5/36)*(59+24*sqrt(6))*eps*ln(eps)^2."""
    if not 0.0 < eps < 1.0:
        raise ParameterDomainError("fold_slope requires 0 < eps < 1")
    L = np.log(eps)
    return 8.0 / (9.0 * eps) + (2.0 / 9.0) * (9.0 + 4.0 * SQ6) * L \
        + (5.0 / 36.0) * (59.0 + 24.0 * SQ6) * eps * L * L


EXPANSIONS = {
    "lambda-star": (lambda_star_lower, "O(eps^2)"),
    "norm-upper": (norm_upper, "O(eps^{3/2} ln eps)"),
    "xi-out": (xi1_out_expansion, "O(delta*eps)"),
    "bifeq": (bifeq_delta, "O(eps)"),
    "slope": (fold_slope, "O(eps^2)"),
}
