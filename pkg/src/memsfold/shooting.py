"""Symmetric half-interval shooting for the membrane boundary value problem.

The canonical desingularized system is integrated from (u, w, xi) = (1, w0, -1)
until the slope turns (w = 0); solutions of the boundary value problem are the
w0 values for which the turn happens at xi = 0.  find_solutions scans a seed
window, brackets the sign changes of the turning-xi residual and polishes
each root.

Near the saddle at u = eps, long plateau passages make the turning position
exponentially sensitive to w0: beyond a resolvable window the solution's w0 is
closer to the critical slope than machine epsilon, direct integration cannot
separate them, and the affected root is delegated to the first-integral
solver (see :mod:`memsfold.firstint`), which stays conditioned there.
"""
from dataclasses import dataclass, field

import numpy as np

from . import backend, firstint
from .errors import IntegrationError, ParameterDomainError
from .integrate import EventSpec, integrate
from .model import ModelParams, norm_u2

NO_TURN_RESIDUAL = 1.0      # sentinel: collapse/no turn counts as "turn at xi = +inf"
DEFAULT_RTOL = 1e-12
DEFAULT_ATOL = 1e-12
DEFAULT_TAU_MAX = 1e18
DEFAULT_MAX_STEPS = 2_000_000
RECORD_CAP = 400_000


@dataclass
class ShotResult:
    """Outcome of one half-interval shot."""
    w0: float
    status: str                      # 'turn' | 'no-turn' | 'cap'
    xi_at_turn: float
    u_at_turn: float
    tau_at_turn: float
    half_profile: object = None      # Trajectory when recorded via the numpy path
    nodes: tuple = None              # (tau, y) arrays when recorded via the numba path
    norm_parts: tuple = None         # (int u^5 dtau, int u^6 dtau) when requested


@dataclass
class SolutionProfile:
    """Symmetric solution sampled on [-1, 1] in original variables."""
    x: np.ndarray
    u: np.ndarray
    w: np.ndarray
    params: ModelParams
    w0: float
    norm2: float
    method: str                      # 'ode' | 'first-integral'
    plateau: float = None            # first-integral plateau coordinate, if applicable
    meta: dict = field(default_factory=dict)


def _u_floor(p):
    return 0.97 * p.eps if p.eps > 0.0 else 0.0


def shoot_half(p, w0, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, tau_max=DEFAULT_TAU_MAX,
               record=False, with_norm=False, backend_override=None):
    """Integrate the desingularized field from (1, w0, -1) to the turn w = 0."""
    if w0 >= 0.0:
        raise ParameterDomainError(f"initial slope must be negative, got {w0}")
    if backend.use_numba(backend_override):
        from . import kernels
        nmax = RECORD_CAP if record else DEFAULT_MAX_STEPS
        ts_buf = np.empty(RECORD_CAP if record else 1)
        ys_buf = np.empty((RECORD_CAP if record else 1, 3))
        status, xi, u, tau, nn, a1, a2 = kernels.shoot(
            p.lam, p.eps, w0, rtol, atol, tau_max, nmax, _u_floor(p),
            record, ts_buf, ys_buf, with_norm)
        if status == kernels.STEP_FAIL:
            raise IntegrationError("stepsize underflow in shooting kernel",
                                   t=tau, y=np.array([u, np.nan, xi]))
        name = {kernels.TURN: "turn", kernels.FLOOR: "no-turn",
                kernels.TIME_CAP: "cap", kernels.STEP_CAP: "cap"}[status]
        return ShotResult(w0=w0, status=name, xi_at_turn=xi, u_at_turn=u,
                          tau_at_turn=tau,
                          nodes=(ts_buf[:nn].copy(), ys_buf[:nn].copy()) if record else None,
                          norm_parts=(a1, a2) if with_norm else None)

    events = [EventSpec("turn", lambda t, y: y[1], "up", True)]
    floor = _u_floor(p)
    if floor > 0.0:
        events.append(EventSpec("floor", lambda t, y: y[0] - floor, "down", True))
    lam, ee = p.lam, p.eps * p.eps

    def rhs(t, y):
        # unvalidated form of rhs_desingularized: trial stages may leave the domain
        u2 = y[0] * y[0]
        u4 = u2 * u2
        return np.array([u4 * y[1], lam * (u2 - ee), u4])

    traj = integrate(rhs, [1.0, w0, -1.0], (0.0, tau_max), rtol=rtol, atol=atol,
                     events=events, max_steps=DEFAULT_MAX_STEPS, record=record)
    ev = {e.id for e in traj.events}
    if "turn" in ev:
        e = traj.events[-1]
        a1 = a2 = None
        if with_norm and record:
            a1, a2 = _trajectory_norm_parts(traj)
        return ShotResult(w0=w0, status="turn", xi_at_turn=float(e.y[2]),
                          u_at_turn=float(e.y[0]), tau_at_turn=float(e.t),
                          half_profile=traj if record else None,
                          norm_parts=(a1, a2) if with_norm and record else None)
    status = "no-turn" if "floor" in ev else "cap"
    return ShotResult(w0=w0, status=status, xi_at_turn=float(traj.y_end[2]),
                      u_at_turn=float(traj.y_end[0]), tau_at_turn=traj.t_end,
                      half_profile=traj if record else None)


def _trajectory_norm_parts(traj):
    """Per-step Gauss quadrature of (u^5, u^6) dtau on the dense interpolant."""
    from numpy.polynomial.legendre import leggauss
    from .integrate import P as PMAT
    gx, gw = leggauss(6)
    gx = 0.5 * (gx + 1.0)
    gw = 0.5 * gw
    a1 = a2 = 0.0
    ts, ys, ks, hs = traj.ts, traj.ys, traj.ks, traj.hsteps
    for k in range(ks.shape[0]):
        theta_hi = (ts[k + 1] - ts[k]) / hs[k]
        th = theta_hi * gx
        tv = np.vstack([th, th**2, th**3, th**4])
        uu = ys[k, 0] + hs[k] * (ks[k, :, 0] @ (PMAT @ tv))
        u5 = uu**5
        a1 += hs[k] * theta_hi * float(gw @ u5)
        a2 += hs[k] * theta_hi * float(gw @ (u5 * uu))
    return a1, a2


def residual(p, w0, **kw):
    """Turning xi as the scalar to be zeroed; no-turn maps to +1."""
    shot = shoot_half(p, w0, **kw)
    if shot.status == "turn":
        return shot.xi_at_turn
    return NO_TURN_RESIDUAL


def _norm2_from_parts(a1, a2):
    # int u dxi = int u^5 dtau on the half interval; identity in shifted variables
    return 2.0 - 4.0 * a1 + 2.0 * a2


def mirror_profile(p, shot, w0):
    """Build the symmetric SolutionProfile from a recorded turning half-shot."""
    if shot.nodes is not None:
        tau, ys = shot.nodes
    else:
        tau, ys = shot.half_profile.ts, shot.half_profile.ys
    xi = ys[:, 2].copy()
    u = ys[:, 0]
    w = ys[:, 1]
    keep = np.concatenate([[True], np.diff(xi) > 0.0])
    xi, u, w = xi[keep], u[keep], w[keep]
    xt = xi[-1]
    x = np.concatenate([xi, 2.0 * xt - xi[-2::-1]])
    uu = np.concatenate([u, u[-2::-1]])
    ww = np.concatenate([w, -w[-2::-1]])
    if shot.norm_parts is not None:
        n2 = _norm2_from_parts(*shot.norm_parts)
    elif shot.half_profile is not None:
        n2 = _norm2_from_parts(*_trajectory_norm_parts(shot.half_profile))
    else:
        n2 = norm_u2(x, uu - 1.0)
    return SolutionProfile(x=x, u=uu - 1.0, w=ww, params=p, w0=w0, norm2=n2, method="ode")


def profile_from_plateau(p, plateau):
    """SolutionProfile through the first-integral solver."""
    x, u, w = firstint.profile_of_plateau(p.eps, p.lam, plateau)
    return SolutionProfile(x=x, u=u, w=w, params=p,
                           w0=firstint.w0_of_plateau(p.eps, p.lam, plateau),
                           norm2=firstint.norm2_of_plateau(p.eps, p.lam, plateau),
                           method="first-integral", plateau=plateau)


def _default_window(p):
    """Seed window covering the flat, touchdown and plateau slope scales."""
    if p.eps > 0.0:
        steep = 1.2 * firstint.wcrit(p.eps, p.lam)
    else:
        steep = 1.5
    shallow = max(0.05 * p.lam, 1e-8)
    return -steep, -shallow


def _refine_root(p, wa, wb, ra, rb, tol=1e-10, **kw):
    """Bisection (secant-accelerated) on the residual; returns (w0, res, stiff)."""
    for _ in range(220):
        wm = 0.5 * (wa + wb)
        if wm == wa or wm == wb:
            # bracket at machine width: exponentially stiff transition
            best = wa if abs(ra) < abs(rb) else wb
            rbest = ra if abs(ra) < abs(rb) else rb
            return best, rbest, True
        # secant candidate, accepted only inside the bracket
        if rb != ra and np.isfinite(ra) and np.isfinite(rb):
            ws = wa - ra * (wb - wa) / (rb - ra)
            if min(wa, wb) < ws < max(wa, wb) and abs(ws - wm) < 0.4 * abs(wb - wa):
                wm = ws
        rm = residual(p, wm, **kw)
        if abs(rm) <= tol:
            return wm, rm, False
        if (rm < 0.0) == (ra < 0.0):
            wa, ra = wm, rm
        else:
            wb, rb = wm, rm
    best = wa if abs(ra) < abs(rb) else wb
    rbest = ra if abs(ra) < abs(rb) else rb
    return best, rbest, abs(rbest) > tol


def _split_hidden_pairs(p, seeds, res, **kw):
    """Resolve root pairs hiding between seeds near folds.

    A near-double root shows up as an interior extremum of the residual that
    approaches zero without a seed crossing it; parabolic refinement of such
    extrema either exposes the crossing (two new brackets) or confirms there
    is none.
    """
    from scipy.optimize import minimize_scalar
    ins_w, ins_r = [], []
    finite = np.isfinite(res)
    for i in range(1, seeds.size - 1):
        if not (finite[i - 1] and finite[i] and finite[i + 1]):
            continue
        is_max = res[i] > res[i - 1] and res[i] > res[i + 1] and res[i] < 0.0
        is_min = res[i] < res[i - 1] and res[i] < res[i + 1] and res[i] > 0.0
        if not (is_max or is_min):
            continue
        sign = -1.0 if is_max else 1.0
        opt = minimize_scalar(lambda w: sign * residual(p, w, **kw),
                              bounds=(seeds[i - 1], seeds[i + 1]), method="bounded",
                              options={"xatol": 1e-12, "maxiter": 80})
        rv = sign * opt.fun
        if (rv > 0.0) if is_max else (rv < 0.0):
            ins_w.append(float(opt.x))
            ins_r.append(float(rv))
    if not ins_w:
        return seeds, res
    allw = np.concatenate([seeds, ins_w])
    allr = np.concatenate([res, ins_r])
    order = np.argsort(allw)
    return allw[order], allr[order]


def _upper_plateau_root(p, w_below):
    """First-integral root above the plateau coordinate of w_below."""
    from scipy.optimize import brentq
    p_lo = firstint.plateau_of_w0(p.eps, p.lam, w_below)
    p_hi = 0.999
    r_lo = firstint.residual_plateau(p.eps, p.lam, p_lo)
    r_hi = firstint.residual_plateau(p.eps, p.lam, p_hi)
    k = 0
    while r_lo * r_hi > 0.0 and k < 30:
        p_hi = 0.5 * (p_hi + 1.0) if r_hi < 0.0 else p_hi
        p_lo *= 0.9 if r_lo > 0.0 else 1.0
        r_lo = firstint.residual_plateau(p.eps, p.lam, p_lo)
        r_hi = firstint.residual_plateau(p.eps, p.lam, p_hi)
        k += 1
    return brentq(lambda q: firstint.residual_plateau(p.eps, p.lam, q),
                  p_lo, p_hi, xtol=1e-15)


def find_solutions(p, w0_min=None, w0_max=None, n_seeds=64, res_tol=1e-10,
                   dedup=1e-8, **kw):
    """All solutions at fixed parameters, sorted by increasing norm.

    Scans log-spaced seeds in |w0|, brackets sign changes of the residual and
    refines each.  Exponentially stiff upper-branch roots are recomputed with
    the first-integral solver.
    """
    if n_seeds < 16:
        raise ValueError("need at least 16 seeds")
    lo, hi = _default_window(p)
    if w0_min is not None:
        lo = w0_min
    if w0_max is not None:
        hi = w0_max
    if not lo < hi < 0.0:
        raise ParameterDomainError(f"invalid seed window [{lo}, {hi}]")
    seeds = -np.geomspace(-lo, -hi, n_seeds)  # from steepest to shallowest
    res = np.array([residual(p, w, **kw) for w in seeds])
    seeds, res = _split_hidden_pairs(p, seeds, res, **kw)
    n_seeds = seeds.size

    roots = []
    for i in range(n_seeds - 1):
        ra, rb = res[i], res[i + 1]
        if not (np.isfinite(ra) and np.isfinite(rb)) or (ra < 0.0) == (rb < 0.0):
            continue
        w0, r, stiff = _refine_root(p, seeds[i], seeds[i + 1], ra, rb,
                                    tol=res_tol, **kw)
        # the shallower bracket end turned (residual < 0): it bounds the
        # plateau coordinate of the stiff root from below
        w_neg = seeds[i] if ra < 0.0 else seeds[i + 1]
        roots.append((w0, stiff, w_neg))

    out = []
    for w0, stiff, w_neg in roots:
        if any(abs(w0 - q.w0) <= dedup * max(1.0, abs(w0)) for q in out):
            continue
        if stiff and p.eps > 0.0:
            out.append(profile_from_plateau(p, _upper_plateau_root(p, w_neg)))
        else:
            shot = shoot_half(p, w0, record=True, with_norm=True, **kw)
            out.append(mirror_profile(p, shot, w0))
    out.sort(key=lambda s: s.norm2)
    dedup_out = []
    for s in out:
        if any(abs(s.w0 - q.w0) <= dedup * max(1.0, abs(s.w0)) for q in dedup_out):
            continue
        dedup_out.append(s)
    return dedup_out


def _f_rhs(u, p):
    g = 1.0 + u
    return p.lam / g**2 * (1.0 - p.eps**2 / g**2)


def profile_sampler(prof):
    """Quintic-Hermite interpolant of u(x) built from (u, w, u''=f(u)) at nodes.

    Off-node values are accurate to O(h^6 u^(6)), which keeps second-difference
    checks meaningful even in the high-curvature corner regions.
    """
    p = prof.params
    x, u, w = prof.x, prof.u, prof.w
    upp = _f_rhs(u, p)

    def sample(xq):
        xq = np.atleast_1d(np.asarray(xq, dtype=float))
        i = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2)
        h = x[i + 1] - x[i]
        t = (xq - x[i]) / h
        t2 = t * t
        t3 = t2 * t
        t4 = t3 * t
        t5 = t4 * t
        h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5
        h10 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5
        h20 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
        h01 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5
        h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5
        h21 = 0.5 * t3 - t4 + 0.5 * t5
        return (u[i] * h00 + h * w[i] * h10 + h * h * upp[i] * h20
                + u[i + 1] * h01 + h * w[i + 1] * h11 + h * h * upp[i + 1] * h21)

    return sample


def verify_profile(prof, n_check=241, widths=(5e-4, 2e-3, 8e-3)):
    """Invariant measures of a solution profile.

    Returns boundary residuals, evenness error, min(1+u), and the max interior
    defect of u'' against the right-hand side.  The defect uses 4th-order
    5-point second differences of the quintic-Hermite samples; each check point
    takes the best of several stencil widths, since no single width suits both
    the smooth stretches and the corner layers.
    """
    p = prof.params
    bc = max(abs(prof.u[0]), abs(prof.u[-1]))
    sample = profile_sampler(prof)
    xs = np.linspace(-0.98, 0.98, n_check)
    sym = float(np.max(np.abs(sample(xs) - sample(-xs))))

    best = np.full(n_check, np.inf)
    for h in widths:
        um2 = sample(xs - 2 * h)
        um1 = sample(xs - h)
        u0 = sample(xs)
        up1 = sample(xs + h)
        up2 = sample(xs + 2 * h)
        fd = (-um2 + 16 * um1 - 30 * u0 + 16 * up1 - up2) / (12 * h * h)
        best = np.minimum(best, np.abs(fd - _f_rhs(u0, p)))
    return {"bc_residual": float(bc), "symmetry": sym,
            "min_gap": float(1.0 + np.min(prof.u)), "bvp_defect": float(np.max(best))}
