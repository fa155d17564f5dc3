"""Bifurcation structure of a regularized MEMS membrane boundary value problem.

Shooting-based solution of the steady-state equation, pseudo-arclength
continuation with fold detection, blow-up chart dynamics, limiting (eps = 0)
solutions, and closed-form asymptotic evaluators, cross-checked against each
other at desk scale.
"""
from .asymptotics import (bifeq_delta, bifeq_minimizer, fold_slope,
                          lambda_star_lower, norm_upper, xi1_out_expansion)
from .continuation import (Branch, BranchPoint, FoldPoint, classify_stability,
                           detect_folds, fold_report, trace_branch)
from .errors import (GridDomainError, IntegrationError, ParameterDomainError,
                     SingularDomainError)
from .integrate import EventSpec, Trajectory, integrate
from .model import (Formulation, ModelParams, StateOriginal, StateRescaled,
                    StateShifted, delta_of, lambda_of, norm_u2,
                    rhs_desingularized, rhs_original, rhs_rescaled)
from .shooting import (ShotResult, SolutionProfile, find_solutions, residual,
                       shoot_half, verify_profile)
from .singular import (SingularOrbit, Type3BranchPoint, lambda0_star,
                       singular_diagram, type1_orbit, type2_orbit, type3_branch,
                       type3_profile)

__version__ = "0.1.0"
