"""Limiting (eps = 0) solutions and the non-regularized branch oracle.

Three types of limiting solutions:

* type I:  plateau at touchdown (u = -1) of half-length 1 - (sqrt(3)/2)*delta,
  linear ramps of slope -+2/(sqrt(3)*delta); exists for 0 < delta < 2/sqrt(3);
* type II: the corner solution u = |x| - 1 with slope -+1 (touchdown at x=0);
* type III: touchdown-free solutions of u'' = lam/u^2 (shifted variables) with
  u = 1 at x = -+1, parametrized by the midpoint value u_min.

For type III the first integral w^2 = 2*lam*(1/u_min - 1/u) turns the
boundary condition into the quadrature

    G(u_min) = int_{u_min}^1 du / sqrt(1/u_min - 1/u),    lam = G^2/2,

where the substitution u = u_min*(1 + s^2) removes the inverse-square-root
endpoint singularity: the integrand becomes 2*u_min^(3/2)*sqrt(1+s^2).  This
branch is the independent oracle against which eps = 0 shooting is checked.
"""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .errors import ParameterDomainError
from .model import DELTA_MAX_TYPE1

SQ3 = np.sqrt(3.0)


@dataclass
class SingularOrbit:
    kind: str                 # 'I' | 'II' | 'III'
    x: np.ndarray
    u: np.ndarray             # original deflection
    w: np.ndarray
    norm2: float
    delta: float = None       # type I parameter
    lam: float = None         # type III parameter
    u_min: float = None       # type III parameter (shifted midpoint value)
    breakpoints: tuple = ()


@dataclass
class Type3BranchPoint:
    u_min: float
    lam: float
    norm2: float
    w0: float                 # slope at x = -1


def _segment_grid(breaks, n_total):
    """Grid covering [-1,1] with every breakpoint at an even Simpson index."""
    breaks = np.asarray(breaks, dtype=float)
    lengths = np.diff(breaks)
    counts = np.maximum((lengths / lengths.sum() * n_total / 2).astype(int) * 2, 2)
    pieces = [np.linspace(breaks[i], breaks[i + 1], counts[i] + 1)[:-1]
              for i in range(len(lengths))]
    return np.concatenate(pieces + [breaks[-1:]])


def type2_orbit(n=2001):
    """Corner solution u = |x| - 1; norm is exactly 2/3."""
    x = _segment_grid([-1.0, 0.0, 1.0], n)
    u = np.abs(x) - 1.0
    w = np.sign(x)
    w[x == 0.0] = 0.0
    return SingularOrbit(kind="II", x=x, u=u, w=w, norm2=2.0 / 3.0,
                         breakpoints=(0.0,))


def type1_orbit(delta, n=2001):
    """Plateau solution for 0 < delta < 2/sqrt(3); norm is 2*(1 - sqrt(3)*delta/3)."""
    if not 0.0 < delta < DELTA_MAX_TYPE1:
        raise ParameterDomainError(
            f"type-I orbit requires 0 < delta < 2/sqrt(3); got {delta}")
    ramp = (SQ3 / 2.0) * delta
    x = _segment_grid([-1.0, -1.0 + ramp, 1.0 - ramp, 1.0], n)
    slope = 2.0 / (SQ3 * delta)
    u = np.full_like(x, -1.0)
    w = np.zeros_like(x)
    left = x < -1.0 + ramp
    right = x > 1.0 - ramp
    u[left] = -(x[left] + 1.0) / ramp
    u[right] = (x[right] - 1.0) / ramp
    w[left] = -slope
    w[right] = slope
    return SingularOrbit(kind="I", x=x, u=u, w=w,
                         norm2=2.0 * (1.0 - SQ3 * delta / 3.0), delta=delta,
                         breakpoints=(-1.0 + ramp, 1.0 - ramp))


def _g_quad(u_min):
    """G(u_min) by adaptive quadrature of the desingularized integrand."""
    s_max = np.sqrt(1.0 / u_min - 1.0)
    val, err = quad(lambda s: 2.0 * u_min**1.5 * np.sqrt(1.0 + s * s), 0.0, s_max,
                    epsabs=1e-14, epsrel=1e-13, limit=200)
    if err > 1e-9 * max(val, 1.0):
        raise RuntimeError(f"G quadrature failed to converge at u_min={u_min}")
    return val


def lambda_of_umin(u_min):
    """Voltage parameter of the type-III solution with midpoint value u_min."""
    if not 0.0 < u_min < 1.0:
        raise ParameterDomainError(f"u_min must be in (0, 1); got {u_min}")
    return 0.5 * _g_quad(u_min) ** 2


def type3_profile(u_min, n=2001):
    """Sampled type-III solution via the s-parametrization."""
    lam = lambda_of_umin(u_min)
    s_max = np.sqrt(1.0 / u_min - 1.0)
    s = np.linspace(0.0, s_max, (n + 1) // 2)
    ut = u_min * (1.0 + s * s)
    # x(s) = -(u_min^{3/2}/sqrt(2 lam)) * (s*sqrt(1+s^2) + asinh(s)), x(s_max) = -1
    xs = -(u_min**1.5 / np.sqrt(2.0 * lam)) * (s * np.sqrt(1.0 + s * s) + np.arcsinh(s))
    w = -np.sqrt(2.0 * lam * np.maximum(1.0 / u_min - 1.0 / ut, 0.0))
    x = np.concatenate([xs[::-1], -xs[1:]])
    u = np.concatenate([ut[::-1], ut[1:]]) - 1.0
    ww = np.concatenate([w[::-1], -w[1:]])
    x[0], x[-1] = -1.0, 1.0
    return SingularOrbit(kind="III", x=x, u=u, w=ww, norm2=_norm3(u_min, lam),
                         lam=lam, u_min=u_min)


def _norm3(u_min, lam):
    """||u||_2^2 of the type-III profile by quadrature in the s variable."""
    s_max = np.sqrt(1.0 / u_min - 1.0)
    pref = 2.0 * u_min**1.5 / np.sqrt(2.0 * lam)

    def half(k):
        val, _ = quad(lambda s: pref * (u_min * (1 + s * s)) ** k * np.sqrt(1 + s * s),
                      0.0, s_max, epsabs=1e-14, epsrel=1e-13, limit=200)
        return val

    return 2.0 - 2.0 * (2.0 * half(1)) + 2.0 * half(2)


def type3_branch(u_min_grid):
    """Branch points (u_min, lam, norm2, w0) of the non-regularized problem."""
    out = []
    for m in np.asarray(u_min_grid, dtype=float):
        lam = lambda_of_umin(m)
        w0 = -np.sqrt(2.0 * lam * (1.0 / m - 1.0))
        out.append(Type3BranchPoint(u_min=float(m), lam=lam,
                                    norm2=_norm3(m, lam), w0=w0))
    return out


def lambda0_star(xatol=1e-13):
    """Fold of the non-regularized branch: max of lam over u_min, and its location."""
    res = minimize_scalar(lambda m: -lambda_of_umin(m), bounds=(0.3, 0.9),
                          method="bounded", options={"xatol": xatol})
    return -res.fun, res.x


def singular_diagram(n_delta=60, n_type3=120):
    """The eps = 0 bifurcation set in the (lam, norm) plane.

    B1: vertical segment lam = 0, norm in [2/3, 2] (plateau family over delta);
    B2: horizontal segment norm = 2 (degenerate plateau limit, lam order one);
    B3: the touchdown-free branch; B: the corner point (0, 2/3).
    """
    deltas = np.linspace(1e-3, DELTA_MAX_TYPE1 * (1 - 1e-9), n_delta)
    b1 = [("B1", d, 0.0, 2.0 * (1.0 - SQ3 * d / 3.0)) for d in deltas]
    lams = np.linspace(1e-3, 1.0, n_delta)
    b2 = [("B2", l, l, 2.0) for l in lams]
    mgrid = 1.0 / (1.0 + np.geomspace(4e3, 1e-3, n_type3))  # u_min from ~0 to ~1
    b3 = [("B3", pt.u_min, pt.lam, pt.norm2) for pt in type3_branch(mgrid)]
    point_b = [("B", 0.0, 0.0, 2.0 / 3.0)]
    return b1 + b2 + b3 + point_b


def write_singular_csv(rows, path):
    """CSV schema: kind,param,lambda,norm_u2."""
    lines = ["kind,param,lambda,norm_u2"]
    for kind, param, lam, norm in rows:
        lines.append(f"{kind},{param:.17g},{lam:.17g},{norm:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
