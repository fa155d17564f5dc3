"""Pseudo-arclength continuation of solution branches, fold detection, stability.

For eps > 0 the branch is traced in the chart (ln lam, ln p), where p is the
first-integral plateau coordinate: unlike (lam, w0) this stays uniformly
well-conditioned through the deep-plateau upper branch, and the log scaling
keeps the curve geometry O(1) near both folds (p is of order eps^2 on the
lower branch but order one on the upper branch).  For eps = 0 no plateau
exists and the branch is traced in (lam, w0) with the shooting residual.
Folds are the arclength points where lam turns around; they are refined by
repeated extremum fits of lam as a function of the transverse coordinate.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import asymptotics, backend, firstint, shooting
from .model import ModelParams

H_MIN = 1e-6
H_MAX = 0.05
CORR_TOL = 1e-11
FD_REL = 1e-7
FD_ABS = 1e-9
LAM_FLOOR = 1e-12


@dataclass
class BranchPoint:
    lam: float
    eps: float
    delta: float
    w0: float
    norm2: float
    stability: str
    arclength: float
    coord: float          # plateau coordinate p (eps > 0) or w0 (eps = 0)
    is_fold: bool = False


@dataclass
class FoldPoint:
    lambda_fold: float
    w0_fold: float
    norm2_fold: float
    kind: str             # 'lower' (min of lam) or 'upper' (max of lam)
    coord: float
    dlam_ds: float
    index: int = -1


@dataclass
class Branch:
    eps: float
    points: list = field(default_factory=list)
    folds: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


class _Problem:
    """Residual and conversions in the continuation chart (a, b).

    eps > 0: a = ln lam, b = ln p;  eps = 0: a = lam, b = w0.
    """

    def __init__(self, eps):
        self.eps = eps
        self.log_chart = eps > 0.0

    def lam_of(self, a):
        return float(np.exp(a)) if self.log_chart else max(a, LAM_FLOOR)

    def a_of_lam(self, lam):
        return float(np.log(lam)) if self.log_chart else lam

    def coord_of(self, b):
        return float(np.exp(b)) if self.log_chart else b

    def b_of_coord(self, c):
        return float(np.log(c)) if self.log_chart else c

    def F(self, a, b):
        if self.log_chart:
            return firstint.residual_plateau(self.eps, np.exp(a), np.exp(b))
        return shooting.residual(ModelParams(eps=0.0, lam=max(a, LAM_FLOOR)), b)

    def w0(self, a, b):
        if self.log_chart:
            return firstint.w0_of_plateau(self.eps, np.exp(a), np.exp(b))
        return b

    def norm2(self, a, b):
        if self.log_chart:
            return firstint.norm2_of_plateau(self.eps, np.exp(a), np.exp(b))
        shot = shooting.shoot_half(ModelParams(eps=0.0, lam=max(a, LAM_FLOOR)), b,
                                   with_norm=True, record=not backend.use_numba())
        if shot.norm_parts is not None:
            return shooting._norm2_from_parts(*shot.norm_parts)
        return shooting._norm2_from_parts(*shooting._trajectory_norm_parts(shot.half_profile))

    def profile(self, a, b):
        lam = self.lam_of(a)
        if self.log_chart:
            return shooting.profile_from_plateau(ModelParams(eps=self.eps, lam=lam),
                                                 self.coord_of(b))
        shot = shooting.shoot_half(ModelParams(eps=0.0, lam=lam), b,
                                   record=True, with_norm=True)
        return shooting.mirror_profile(ModelParams(eps=0.0, lam=lam), shot, b)


def _corrector(prob, z_pred, tangent, z_init=None, max_iter=12):
    """Damped Newton on {F = 0, tangent . (z - z_pred) = 0}."""
    a, b = z_init if z_init is not None else z_pred
    f = prob.F(a, b)
    for _ in range(max_iter):
        g = tangent[0] * (a - z_pred[0]) + tangent[1] * (b - z_pred[1])
        if abs(f) < CORR_TOL and abs(g) < 1e-12:
            return (a, b), f, True
        da = max(FD_REL * abs(a), FD_ABS)
        db = max(FD_REL * abs(b), FD_ABS)
        fa = (prob.F(a + da, b) - f) / da
        fb = (prob.F(a, b + db) - f) / db
        det = fa * tangent[1] - fb * tangent[0]
        if det == 0.0 or not np.isfinite(det):
            return (a, b), f, False
        step_a = (-f * tangent[1] + fb * g) / det
        step_b = (-g * fa + f * tangent[0]) / det
        damp = 1.0
        for _ in range(6):
            f_new = prob.F(a + damp * step_a, b + damp * step_b)
            if np.isfinite(f_new) and abs(f_new) <= max(abs(f) * 0.99, CORR_TOL * 0.5):
                break
            damp *= 0.5
        a += damp * step_a
        b += damp * step_b
        f = prob.F(a, b)
    g = tangent[0] * (a - z_pred[0]) + tangent[1] * (b - z_pred[1])
    return (a, b), f, abs(f) < CORR_TOL and abs(g) < 1e-9


def _solve_b(prob, a, b_guess):
    """1-d Newton for F(a, b) = 0 in the transverse chart coordinate."""
    b = b_guess
    f = prob.F(a, b)
    for _ in range(60):
        if abs(f) < CORR_TOL:
            return b
        db = max(FD_REL * abs(b), FD_ABS)
        fb = (prob.F(a, b + db) - f) / db
        if fb == 0.0 or not np.isfinite(fb):
            break
        step = np.clip(-f / fb, -0.5 * max(abs(b), 1e-3), 0.5 * max(abs(b), 1e-3))
        b += step
        f = prob.F(a, b)
    if abs(f) < 1e-9:
        return b
    raise RuntimeError(f"transverse solve failed at a={a}: residual {f}")


def _solve_a(prob, b, a_guess):
    """1-d Newton for F(a, b) = 0 in the lam-like chart coordinate (fold-safe)."""
    a = a_guess
    f = prob.F(a, b)
    for _ in range(60):
        if abs(f) < CORR_TOL:
            return a
        da = max(FD_REL * abs(a), FD_ABS)
        fa = (prob.F(a + da, b) - f) / da
        if fa == 0.0 or not np.isfinite(fa):
            break
        step = np.clip(-f / fa, -0.3 * max(abs(a), 1e-2), 0.3 * max(abs(a), 1e-2))
        a += step
        f = prob.F(a, b)
    if abs(f) < 1e-9:
        return a
    raise RuntimeError(f"lam solve failed at b={b}: residual {f}")


def _lower_branch_start(prob, lam0):
    """Transverse coordinate of the unique lower-branch solution at small lam0."""
    a = prob.a_of_lam(lam0)
    if prob.log_chart:
        grid = np.log(np.geomspace(1e-9, 0.9, 140))
    else:
        grid = -np.geomspace(1e-4 * max(lam0, 1e-6), 1.4, 140)
    r_prev = prob.F(a, grid[0])
    for x0, x1 in zip(grid[:-1], grid[1:]):
        r_next = prob.F(a, x1)
        if np.isfinite(r_prev) and np.isfinite(r_next) and (r_prev < 0) != (r_next < 0):
            from scipy.optimize import brentq
            return brentq(lambda b: prob.F(a, b), x0, x1, xtol=1e-14)
        r_prev = r_next
    raise RuntimeError(f"no starting solution found at lam={lam0}, eps={prob.eps}")


def _make_point(prob, a, b, s, classify, n_stab):
    eps = prob.eps
    lam = prob.lam_of(a)
    stability = "unknown"
    if classify:
        stability = classify_stability(prob.profile(a, b), ModelParams(eps=eps, lam=lam),
                                       n=n_stab)
    return BranchPoint(lam=lam, eps=eps, delta=np.sqrt(eps / lam), w0=prob.w0(a, b),
                       norm2=prob.norm2(a, b), stability=stability,
                       arclength=s, coord=prob.coord_of(b))


def trace_branch(eps, start=None, s_max=80.0, h0=2e-3, lambda_max=1.0,
                 lambda_min=1e-6, lambda0=0.005, stop_after_folds=None,
                 fold_tail=12, classify=False, n_stab=2001, max_points=20000):
    """Trace the solution branch from the lower branch upward through the folds.

    start, when given, is (lambda_start, w0_start) on the branch; otherwise
    the lower branch at lambda0 is located automatically.  Tracing stops past
    lambda_max (with increasing lam), below lambda_min, after s_max chart
    arclength, or fold_tail points after stop_after_folds turning points.
    """
    prob = _Problem(eps)
    if start is None:
        lam = min(lambda0, lambda_max / 2)
        b = _lower_branch_start(prob, lam)
        a = prob.a_of_lam(lam)
    else:
        lam, w0_0 = start
        a = prob.a_of_lam(lam)
        b0 = firstint.plateau_of_w0(eps, lam, w0_0) if eps > 0.0 else w0_0
        b = _solve_b(prob, a, prob.b_of_coord(b0))

    branch = Branch(eps=eps)
    pts_z = [(a, b)]
    s = 0.0
    branch.points.append(_make_point(prob, a, b, s, classify, n_stab))

    a2 = a + (0.02 if prob.log_chart else max(1e-4, 0.2 * h0))
    b2 = _solve_b(prob, a2, b)
    s += np.hypot(a2 - a, b2 - b)
    pts_z.append((a2, b2))
    branch.points.append(_make_point(prob, a2, b2, s, classify, n_stab))

    h = h0
    n_turn = 0
    tail = None
    while s < s_max and len(branch.points) < max_points:
        z0 = np.array(pts_z[-2])
        z1 = np.array(pts_z[-1])
        t = z1 - z0
        nt = np.linalg.norm(t)
        if nt == 0.0:
            break
        t /= nt
        accepted = False
        for _ in range(25):
            z_pred = z1 + h * t
            z_new, f, ok = _corrector(prob, z_pred, t)
            if ok and np.hypot(z_new[0] - z1[0], z_new[1] - z1[1]) <= 3.0 * h + 1e-12:
                accepted = True
                break
            if h <= H_MIN * 1.0001:
                break
            h = max(h * 0.35, H_MIN)
        if not accepted:
            branch.diagnostics["truncated"] = (
                f"corrector failed at s={s:.4f}, lam={prob.lam_of(z1[0]):.6g}")
            break
        s += np.hypot(z_new[0] - z1[0], z_new[1] - z1[1])
        pts_z.append(tuple(z_new))
        branch.points.append(_make_point(prob, z_new[0], z_new[1], s, classify, n_stab))
        h = min(h * 1.4, H_MAX)

        lam_n = branch.points[-1].lam
        if len(branch.points) >= 3:
            d1 = branch.points[-1].lam - branch.points[-2].lam
            d0 = branch.points[-2].lam - branch.points[-3].lam
            if d1 * d0 < 0.0:
                n_turn += 1
        if stop_after_folds is not None and n_turn >= stop_after_folds:
            if tail is None:
                tail = fold_tail
            tail -= 1
            if tail <= 0:
                break
        if (lam_n > lambda_max and branch.points[-1].lam > branch.points[-2].lam) \
                or lam_n < lambda_min:
            break

    detect_folds(branch)
    return branch


def _lambda_extremum(prob, b_triplet, lam_triplet, iters=10):
    """Refine a fold by parabola iterations of lam over the transverse chart
    coordinate (the branch is locally a graph over it)."""
    x = np.asarray(b_triplet, dtype=float)
    y = np.asarray(lam_triplet, dtype=float)
    for _ in range(iters):
        coef = np.polyfit(x, y, 2)
        if coef[0] == 0.0 or not np.isfinite(coef[0]):
            break
        xv = -coef[1] / (2.0 * coef[0])
        span = 0.30 * (np.max(x) - np.min(x))
        if not np.isfinite(xv) or xv < np.min(x) - span or xv > np.max(x) + span:
            xv = x[int(np.argmin(y))] if coef[0] > 0 else x[int(np.argmax(y))]
        xs = np.array([xv - span, xv, xv + span])
        ys = []
        for xx in xs:
            a_guess = prob.a_of_lam(float(np.polyval(coef, xx)))
            ys.append(prob.lam_of(_solve_a(prob, xx, a_guess)))
        x, y = xs, np.array(ys)
    coef = np.polyfit(x, y, 2)
    xv = float(-coef[1] / (2.0 * coef[0]))
    lam_v = prob.lam_of(_solve_a(prob, xv, prob.a_of_lam(float(np.polyval(coef, xv)))))
    return xv, lam_v, float(coef[0])


def detect_folds(branch):
    """Locate and refine the turning points of lam along the branch."""
    pts = branch.points
    branch.folds = []
    if len(pts) < 3:
        return branch.folds
    prob = _Problem(branch.eps)
    lam = np.array([q.lam for q in pts])
    bs = np.array([prob.b_of_coord(q.coord) for q in pts])
    for i in range(1, len(pts) - 1):
        if (lam[i + 1] - lam[i]) * (lam[i] - lam[i - 1]) < 0.0:
            bv, lam_f, curv = _lambda_extremum(prob, bs[i - 1:i + 2], lam[i - 1:i + 2])
            kind = "lower" if curv > 0.0 else "upper"
            d = max(1e-7, 1e-5 * abs(bv))
            l1 = prob.lam_of(_solve_a(prob, bv - d, prob.a_of_lam(lam_f)))
            l2 = prob.lam_of(_solve_a(prob, bv + d, prob.a_of_lam(lam_f)))
            dlam_ds = abs(l2 - l1) / (2.0 * d)
            fp = FoldPoint(lambda_fold=lam_f, w0_fold=prob.w0(prob.a_of_lam(lam_f), bv),
                           norm2_fold=prob.norm2(prob.a_of_lam(lam_f), bv), kind=kind,
                           coord=prob.coord_of(bv), dlam_ds=float(dlam_ds), index=i)
            branch.folds.append(fp)
    for q in pts:
        q.is_fold = False
    coords = np.array([q.coord for q in pts])
    for fp in branch.folds:
        j = int(np.argmin(np.abs(lam - fp.lambda_fold) / max(fp.lambda_fold, 1e-12)
                          + np.abs(coords - fp.coord) / max(abs(fp.coord), 1e-12)))
        fp.index = j
        pts[j].is_fold = True
    return branch.folds


def classify_stability(prof, p, n=2001):
    """Sign of the smallest Dirichlet eigenvalue of -psi'' + f_u(u) psi.

    f(u) = lam*(1+u)^-2 - lam*eps^2*(1+u)^-4 is the right-hand side of the
    steady-state equation; the steady state is linearly stable iff the
    smallest eigenvalue is positive.  Returns 'unknown' when the uniform grid
    cannot resolve the corner layer of the profile.
    """
    sample = shooting.profile_sampler(prof)
    xs = np.linspace(-1.0, 1.0, n)
    us = sample(xs)
    h = xs[1] - xs[0]
    layer = (1.0 + np.min(us)) / max(np.max(np.abs(prof.w)), 1e-30)
    if layer < 5.0 * h:
        return "unknown"
    g = 1.0 + us[1:-1]
    fu = -2.0 * p.lam / g**3 + 4.0 * p.lam * p.eps**2 / g**5
    d = 2.0 / (h * h) + fu
    e = np.full(n - 3, -1.0 / (h * h))
    mu1 = eigh_tridiagonal(d, e, select="i", select_range=(0, 0),
                           eigvals_only=True)[0]
    if mu1 > 1e-8:
        return "stable"
    if mu1 < -1e-8:
        return "unstable"
    return "unknown"


def slope_at_fold(branch, fold, window=(1.02, 1.30)):
    """Branch-local d||u||^2/dlam just outside a lower fold, on the upper side.

    Exactly at the fold the (lam, norm) curve has a vertical tangent; the
    meaningful slope lives in the surrounding corridor where the upper branch
    is a graph over lam.  Points with lam in [window[0], window[1]]*lambda_fold
    past the fold are fit with a quadratic in lam and the derivative is read
    off at the corridor's inner edge.
    """
    pts = branch.points[fold.index + 1:]
    lam_f = fold.lambda_fold
    sel = [q for q in pts if window[0] * lam_f <= q.lam <= window[1] * lam_f]
    if len(sel) < 3:
        raise RuntimeError("not enough branch points past the fold for a slope fit")
    l = np.array([q.lam for q in sel])
    n = np.array([q.norm2 for q in sel])
    coef = np.polyfit(l - lam_f, n - fold.norm2_fold, 2)
    x0 = (window[0] - 1.0) * lam_f
    return float(2.0 * coef[0] * x0 + coef[1])


def fold_report(eps_list, workers=4, lambda_max=0.6):
    """Numeric vs asymptotic lower fold for each eps, plus the upper fold."""
    from concurrent.futures import ThreadPoolExecutor

    def row(eps):
        try:
            br = trace_branch(eps, stop_after_folds=2, lambda_max=lambda_max)
            lam_lower = [f for f in br.folds if f.kind == "lower"]
            lam_upper = [f for f in br.folds if f.kind == "upper"]
            lnum = lam_lower[0].lambda_fold if lam_lower else np.nan
            lasy = asymptotics.lambda_star_lower(eps)
            return {"eps": eps, "lambda_star_numeric": lnum,
                    "lambda_star_asymptotic": lasy,
                    "abs_error": abs(lnum - lasy),
                    "lambda_upper_numeric": (lam_upper[0].lambda_fold
                                             if lam_upper else np.nan)}
        except Exception as exc:  # propagate per-row, keep the table going
            return {"eps": eps, "error": str(exc)}

    if not eps_list:
        return []
    with ThreadPoolExecutor(max_workers=min(workers, len(eps_list))) as ex:
        return list(ex.map(row, eps_list))


def write_branch_csv(branch, path, branch_id=0):
    """CSV schema: branch_id,idx,eps,lambda,delta,w0,norm_u2,stability,is_fold."""
    lines = ["branch_id,idx,eps,lambda,delta,w0,norm_u2,stability,is_fold"]
    for i, q in enumerate(branch.points):
        lines.append(f"{branch_id},{i},{q.eps:.17g},{q.lam:.17g},{q.delta:.17g},"
                     f"{q.w0:.17g},{q.norm2:.17g},{q.stability},{int(q.is_fold)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
