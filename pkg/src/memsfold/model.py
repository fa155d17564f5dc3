"""Problem definition: parameters, coordinate formulations, vector fields, norms.

The membrane steady-state equation  u'' = lam*(1+u)^-2 * [1 - eps^2*(1+u)^-2]
on [-1, 1] with u(-+1) = 0 is treated in three first-order formulations:

* Original      (x; u, w):        u' = w,  w' = lam*(1+u)^-2*[1 - eps^2*(1+u)^-2]
* Desingularized (tau; u, w, xi): u' = u^4 w,  w' = lam*(u^2 - eps^2),  xi' = u^4,
  in the shifted variable u := 1 + u_original, where the factor (1+u)^4 has been
  multiplied into the field to remove the touchdown singularity.
* Rescaled      (s; u, w, xi):    u' = u^4 w,  w' = eps*(u^2 - eps^2),  xi' = delta*u^4,
  with slope scaled by delta = sqrt(eps/lam).

The Desingularized form is the canonical one used by the solvers; Original is
retained as a cross-validation oracle.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import simpson

from .errors import GridDomainError, ParameterDomainError, SingularDomainError

DELTA_MAX_TYPE1 = 2.0 / np.sqrt(3.0)   # plateau solutions require delta < 2/sqrt(3)


def delta_of(eps, lam):
    """delta = sqrt(eps/lam); requires lam > 0."""
    if lam <= 0.0:
        raise ParameterDomainError(f"delta undefined for lambda = {lam}")
    if eps < 0.0:
        raise ParameterDomainError(f"eps must be >= 0, got {eps}")
    return np.sqrt(eps / lam)


def lambda_of(eps, delta):
    """Inverse of delta_of: lam = eps/delta^2; requires delta > 0."""
    if delta <= 0.0:
        raise ParameterDomainError(f"lambda undefined for delta = {delta}")
    if eps < 0.0:
        raise ParameterDomainError(f"eps must be >= 0, got {eps}")
    return eps / (delta * delta)


@dataclass(frozen=True)
class ModelParams:
    """Regularization strength eps >= 0 and voltage parameter lam >= 0."""
    eps: float
    lam: float

    def __post_init__(self):
        if self.eps < 0.0:
            raise ParameterDomainError(f"eps must be >= 0, got {self.eps}")
        if self.lam < 0.0:
            raise ParameterDomainError(f"lambda must be >= 0, got {self.lam}")

    @property
    def delta(self):
        return delta_of(self.eps, self.lam)

    def in_type1_window(self):
        """Admissible (eps, delta) window for plateau-type solutions."""
        if self.lam <= 0.0:
            return False
        d = self.delta
        return bool(np.sqrt(self.eps) <= d <= DELTA_MAX_TYPE1)


class Formulation(Enum):
    ORIGINAL = "original"
    DESINGULARIZED = "desingularized"
    RESCALED = "rescaled"


def rhs_for(formulation):
    """Right-hand side selected by formulation tag.

    ORIGINAL integrates in x with state (u, w); the other two integrate in
    their own desingularized time with state (u, w, xi).
    """
    if formulation is Formulation.ORIGINAL:
        return rhs_original
    if formulation is Formulation.DESINGULARIZED:
        return lambda state, params: rhs_desingularized(state, params)
    if formulation is Formulation.RESCALED:
        return lambda state, params: rhs_rescaled(state, params)
    raise ValueError(f"unknown formulation {formulation!r}")


@dataclass(frozen=True)
class StateOriginal:
    """Deflection u in (-1, 0] and slope w in the original variables."""
    u: float
    w: float


@dataclass(frozen=True)
class StateShifted:
    """Shifted deflection u = 1 + u_original in (0, 1], slope w, space xi."""
    u: float
    w: float
    xi: float


@dataclass(frozen=True)
class StateRescaled:
    """Shifted deflection, slope scaled by delta (w_resc = delta*w), space xi."""
    u: float
    w: float
    xi: float


def _unpack3(state):
    if isinstance(state, (StateShifted, StateRescaled)):
        return state.u, state.w, state.xi
    u, w, xi = state
    return u, w, xi


def rhs_desingularized(state, params):
    """Canonical field: (u^4 w, lam*(u^2 - eps^2), u^4) in shifted variables."""
    u, w, _ = _unpack3(state)
    if np.any(np.asarray(u) < 0.0):
        raise SingularDomainError("shifted deflection must satisfy u >= 0")
    u2 = u * u
    u4 = u2 * u2
    return np.array([u4 * w, params.lam * (u2 - params.eps**2), u4])


def rhs_rescaled(state, params):
    """Slope-rescaled field: (u^4 w, eps*(u^2 - eps^2), delta*u^4)."""
    d = params.delta  # raises for lam == 0
    u, w, _ = _unpack3(state)
    u2 = u * u
    u4 = u2 * u2
    return np.array([u4 * w, params.eps * (u2 - params.eps**2), d * u4])


def rhs_original(x, state, params):
    """Unshifted second-order equation as a first-order system in x."""
    if isinstance(state, StateOriginal):
        u, w = state.u, state.w
    else:
        u, w = state
    if np.any(np.asarray(u) <= -1.0):
        raise SingularDomainError("original deflection must satisfy u > -1")
    g = 1.0 + u
    return np.array([w, params.lam / g**2 * (1.0 - params.eps**2 / g**2)])


def to_shifted(x, state):
    """Original (x; u, w) -> shifted (u~, w, xi) with u~ = 1 + u, xi = x."""
    return StateShifted(u=1.0 + state.u, w=state.w, xi=x)


def to_original(state):
    """Shifted (u~, w, xi) -> (xi; u, w) with u = u~ - 1."""
    return state.xi, StateOriginal(u=state.u - 1.0, w=state.w)


def rescale_state(state, params):
    """Shifted -> rescaled: w_resc = delta * w."""
    return StateRescaled(u=state.u, w=params.delta * state.w, xi=state.xi)


def unrescale_state(state, params):
    """Rescaled -> shifted: w = w_resc / delta."""
    return StateShifted(u=state.u, w=state.w / params.delta, xi=state.xi)


def norm_u2(x, u):
    """squared L2 norm of the original deflection over [-1, 1].

    Evaluated through the shifted variable as 2 - 2*||u~||_1 + ||u~||_2^2 with
    u~ = 1 + u, using composite Simpson quadrature on the sampled grid.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.ndim != 1 or x.shape != u.shape or x.size < 3:
        raise GridDomainError("profile grid and samples must be matching 1-d arrays")
    if np.any(np.diff(x) <= 0.0):
        raise GridDomainError("profile grid must be strictly increasing")
    if abs(x[0] + 1.0) > 1e-9 or abs(x[-1] - 1.0) > 1e-9:
        raise GridDomainError("profile grid must cover [-1, 1]")
    ut = 1.0 + u
    n1 = simpson(ut, x=x)
    n2 = simpson(ut * ut, x=x)
    return 2.0 - 2.0 * n1 + n2
