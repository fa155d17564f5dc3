"""Exact first-integral reduction of the half-orbit to 1-d quadrature.

Along the desingularized field (u' = u^4 w, w' = lam*(u^2 - eps^2), xi' = u^4)
the slope obeys the exact relation

    w(u)^2 = Qc(u) - rho^2,
    Qc(u)  = (2*lam/(3*eps)) * (u - eps)^2 * (2*u + eps) / u^3,

where rho^2 = wcrit^2 - w0^2 and wcrit = sqrt(Qc(1)) is the slope of the
saddle connection.  Since dxi/du = 1/w, the boundary-value residual and the
norm integrals become quadratures.  In the offset variable v = u - eps,

    t := sqrt(Qc) = v*sqrt(c2(v)),   c2(v) = (2*lam/(3*eps))*(3*eps+2*v)/(eps+v)^3,

which stays exact for arbitrarily small v (no cancellation against eps).

The passage integrals  int u^k du / sqrt(Qc - rho^2)  from the turning point
u_t (where Qc = rho^2) up to u = 1 are evaluated in three pieces:

* turning piece, substituting t = rho*cosh(th) for th in [0, min(Theta, 2)],
  Theta = arccosh(wcrit/rho), which removes the inverse-square-root endpoint
  singularity; the integrand h(t) = du/dt = sqrt(c2)*(eps+v)^4/(lam*(v+2*eps))
  is smooth there;
* an exact plateau piece h0*eps^k*dtheta with h0 = sqrt(eps^3/(2*lam)) while
  t is many e-foldings below scale (only for deep passages);
* the ramp piece in the variable v on a geometric grid, where the integrand
  u^k/sqrt(v^2*c2(v) - rho^2) is smooth in ln v.

This parametrization stays well-conditioned arbitrarily deep in the plateau
regime, where the initial slope w0 = -wcrit*tanh(Theta) is closer to the
critical slope than machine epsilon and direct shooting degenerates.  The
natural branch parameter is the plateau coordinate p = h0*Theta, which stays
O(1) along the entire solution curve.
"""
import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ParameterDomainError

_GN, _GW = leggauss(24)
_G8N, _G8W = leggauss(8)

THETA_TURN = 2.0        # extent of the cosh substitution around the turning point
THETA_FLAT = 43.0       # beyond Theta - THETA_FLAT the passage is flat to 1e-18


def crit2(eps, lam):
    """Squared slope of the saddle connection: Qc(1)."""
    if eps <= 0.0 or lam <= 0.0:
        raise ParameterDomainError("first-integral machinery requires eps > 0 and lam > 0")
    return (4.0 * lam / 3.0) / eps - 2.0 * lam + (2.0 * lam / 3.0) * eps * eps


def wcrit(eps, lam):
    return np.sqrt(crit2(eps, lam))


def qc(u, eps, lam):
    return (2.0 * lam / (3.0 * eps)) * (u - eps) ** 2 * (2.0 * u + eps) / u**3


def dqc(u, eps, lam):
    return 2.0 * lam / u**2 - 2.0 * lam * eps * eps / u**4


def h0(eps, lam):
    return np.sqrt(eps**3 / (2.0 * lam))


def _c2(v, eps, lam):
    return (2.0 * lam / (3.0 * eps)) * (3.0 * eps + 2.0 * v) / (eps + v) ** 3


def v_of_t(t, eps, lam):
    """Invert t = v*sqrt(c2(v)) for v in [0, 1-eps]; vectorized safeguarded Newton."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    tt = np.atleast_1d(t).astype(float)
    c = wcrit(eps, lam)
    lo = np.zeros_like(tt)
    hi = np.full_like(tt, 1.0 - eps)
    # init: exact for v << eps, pole-corrected toward t -> wcrit
    q = np.minimum(tt / c, 1.0 - 1e-12) ** (2.0 / 3.0)
    v = np.clip(h0(eps, lam) * tt / np.maximum(1.0 - q, 1e-12), 0.0, 1.0 - eps)
    for _ in range(60):
        s = np.sqrt(_c2(v, eps, lam))
        g = v * s - tt
        lo = np.where(g < 0, v, lo)
        hi = np.where(g > 0, v, hi)
        dc2 = (2.0 * lam / (3.0 * eps)) * (-(7.0 * eps + 4.0 * v)) / (eps + v) ** 4
        dg = s + v * dc2 / (2.0 * s)
        vn = v - g / np.where(dg > 0, dg, 1.0)
        bad = (vn < lo) | (vn > hi) | ~np.isfinite(vn)
        vn = np.where(bad, 0.5 * (lo + hi), vn)
        if np.all(np.abs(vn - v) <= 1e-12 * vn + 1e-300):
            v = vn
            break
        v = vn
    return float(v[0]) if scalar else v


def u_of_t(t, eps, lam):
    """Invert Qc(u) = t^2 on [eps, 1]."""
    return eps + v_of_t(t, eps, lam)


def _h_of_v(v, eps, lam):
    """h = du/dt at offset v, cancellation-free."""
    return np.sqrt(_c2(v, eps, lam)) * (eps + v) ** 4 / (lam * (v + 2.0 * eps))


def _logcosh(z):
    z = np.abs(z)
    return z + np.log1p(np.exp(-2.0 * z)) - np.log(2.0)


def _log_t(th, theta, c):
    """log of t = (wcrit/cosh(Theta))*cosh(th), overflow-safe."""
    return np.log(c) + _logcosh(th) - _logcosh(theta)


def _gauss_fixed(f, edges):
    """Composite 24-point Gauss on the given panel edges.

    The integrands this module produces are analytic on their panels with
    O(1) scale in the panel coordinate, so fixed panels of width <= 0.05
    (turning chart) / 0.25 in ln v (ramp chart) are converged to machine
    precision; see the cross-checks in the test suite.
    """
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    x = (mid + half * _GN[None, :]).ravel()
    w = (half * _GW[None, :]).ravel()
    return float(np.sum(w * f(x)))


def _split(theta, eps, lam):
    """Common geometry: (theta_s, theta_t, c, rho, t_lo, v_lo)."""
    c = wcrit(eps, lam)
    th_s = min(theta, THETA_TURN)
    th_t = max(th_s, theta - THETA_FLAT)
    rho = c / np.cosh(theta) if theta < 350.0 else 0.0
    if theta > th_s:
        t_lo = np.exp(_log_t(th_t, theta, c))
        v_lo = v_of_t(t_lo, eps, lam)
    else:
        t_lo = v_lo = None
    return th_s, th_t, c, rho, t_lo, v_lo


def passage_integral(theta, eps, lam, k=0):
    """int_{u_t}^{1} u^k du / sqrt(Qc - rho^2) with Theta = arccosh(wcrit/rho)."""
    if theta <= 0.0:
        return 0.0
    th_s, th_t, c, rho, t_lo, v_lo = _split(theta, eps, lam)
    hh0 = h0(eps, lam) * eps**k

    def f_turn(th):
        t = np.exp(_log_t(th, theta, c))
        v = v_of_t(t, eps, lam)
        val = _h_of_v(v, eps, lam)
        return val if k == 0 else val * (eps + v) ** k

    n_turn = max(4, int(np.ceil(th_s / 0.05)))
    total = _gauss_fixed(f_turn, np.linspace(0.0, th_s, n_turn + 1))

    if theta > th_s:
        total += hh0 * (th_t - th_s)
        rho2 = rho * rho

        def f_ramp(v):
            w2 = v * v * _c2(v, eps, lam) - rho2
            val = 1.0 / np.sqrt(w2)
            return val if k == 0 else val * (eps + v) ** k

        v_hi = 1.0 - eps
        n_ramp = max(16, int(np.ceil(np.log(v_hi / v_lo) / 0.25)))
        total += _gauss_fixed(f_ramp, np.geomspace(v_lo, v_hi, n_ramp + 1))
    return total


def theta_of_plateau(eps, lam, p):
    return p / h0(eps, lam)


def residual_plateau(eps, lam, p):
    """Boundary-value residual (turning xi) as a function of the plateau coordinate."""
    return -1.0 + passage_integral(theta_of_plateau(eps, lam, p), eps, lam, 0)


def w0_of_plateau(eps, lam, p):
    """Initial slope; equals -wcrit*tanh(Theta), machine-indistinguishable from
    -wcrit deep in the plateau regime."""
    return -wcrit(eps, lam) * np.tanh(theta_of_plateau(eps, lam, p))


def plateau_of_w0(eps, lam, w0):
    """Inverse of w0_of_plateau for -wcrit < w0 < 0."""
    c = wcrit(eps, lam)
    if not -c < w0 < 0.0:
        raise ParameterDomainError(f"w0 must lie in (-wcrit, 0) = ({-c}, 0); got {w0}")
    return h0(eps, lam) * np.arctanh(-w0 / c)


def residual_w0(eps, lam, w0):
    """Turning-xi residual as a function of the initial slope (cross-check form)."""
    return residual_plateau(eps, lam, plateau_of_w0(eps, lam, w0))


def turn_point(eps, lam, p):
    """Shifted deflection at the turning point (minimum of the profile)."""
    theta = theta_of_plateau(eps, lam, p)
    c = wcrit(eps, lam)
    return u_of_t(np.exp(_log_t(0.0, theta, c)), eps, lam)


def norm2_of_plateau(eps, lam, p):
    """||u||_2^2 of the solution with plateau coordinate p, via
    2 - 2*||u~||_1 + ||u~||_2^2 with the passage quadratures."""
    theta = theta_of_plateau(eps, lam, p)
    i1 = passage_integral(theta, eps, lam, 1)
    i2 = passage_integral(theta, eps, lam, 2)
    return 2.0 - 4.0 * i1 + 2.0 * i2


def _cumulative(xvals, f):
    """Gauss-8 integrals of f over consecutive intervals of xvals."""
    a = xvals[:-1][:, None]
    b = xvals[1:][:, None]
    mid = 0.5 * (a + b) + 0.5 * (b - a) * _G8N[None, :]
    wq = 0.5 * (b - a) * _G8W[None, :]
    return np.sum(wq * f(mid.ravel()).reshape(mid.shape), axis=1)


def profile_of_plateau(eps, lam, p, n_ramp=600, n_turn=160, x_fill=1e-3):
    """Sampled symmetric profile (x, u_original, w) on [-1, 1].

    Ramp sampled geometrically in v = u - eps, turning region in the cosh
    variable; for deep passages the plateau is filled with u = eps (exact to
    double precision) and linear xi.
    """
    theta = theta_of_plateau(eps, lam, p)
    th_s, th_t, c, rho, t_lo, v_lo = _split(theta, eps, lam)
    hh0 = h0(eps, lam)
    rho2 = rho * rho

    # turning piece: theta descending from th_s to 0 <-> u descending to u_t
    th = np.linspace(th_s, 0.0, n_turn + 1)
    t = np.exp(_log_t(th, theta, c))
    v_turn = v_of_t(t, eps, lam)
    w_turn = -t * np.tanh(th)    # = -sqrt(t^2 - rho^2), stable

    def f_turn(tt):
        ts = np.exp(_log_t(tt, theta, c))
        return _h_of_v(v_of_t(ts, eps, lam), eps, lam)

    seg_turn = -_cumulative(th, f_turn)    # th descending -> positive increments

    if theta > th_s:
        # ramp piece: v descending from 1-eps to v_lo
        vr = np.geomspace(1.0 - eps, v_lo, n_ramp + 1)

        def f_ramp(v):
            return 1.0 / np.sqrt(v * v * _c2(v, eps, lam) - rho2)

        seg_ramp = -_cumulative(vr, f_ramp)
        # plateau piece between th_t and th_s (deep only)
        plateau_len = hh0 * (th_t - th_s)
        # xi accumulation: start at u=1 (xi=-1), ramp, plateau, turning piece
        xi_ramp = -1.0 + np.concatenate([[0.0], np.cumsum(seg_ramp)])
        xi_after_plateau = xi_ramp[-1] + plateau_len
        xi_turnpiece = xi_after_plateau + np.concatenate([[0.0], np.cumsum(seg_turn)])

        x_parts = [xi_ramp]
        u_parts = [eps + vr]
        w_parts = [-np.sqrt(np.maximum(vr * vr * _c2(vr, eps, lam) - rho2, 0.0))]
        if plateau_len > 0.0:
            n_fill = max(int(np.ceil(plateau_len / x_fill)), 2)
            x_pl = np.linspace(xi_ramp[-1], xi_after_plateau, n_fill + 1)[1:-1]
            x_parts.append(x_pl)
            u_parts.append(np.full(x_pl.size, eps + v_lo))
            w_parts.append(np.full(x_pl.size, -t_lo))
        x_parts.append(xi_turnpiece)
        u_parts.append(eps + v_turn)
        w_parts.append(w_turn)
        x_left = np.concatenate(x_parts)
        u_left = np.concatenate(u_parts)
        w_left = np.concatenate(w_parts)
    else:
        x_left = -1.0 + np.concatenate([[0.0], np.cumsum(seg_turn)])
        u_left = eps + v_turn
        w_left = w_turn

    xi_turn = x_left[-1]
    x = np.concatenate([x_left, 2.0 * xi_turn - x_left[-2::-1]])
    uu = np.concatenate([u_left, u_left[-2::-1]])
    ww = np.concatenate([w_left, -w_left[-2::-1]])
    keep = np.concatenate([[True], np.diff(x) > 0.0])
    return x[keep], uu[keep] - 1.0, ww[keep]
