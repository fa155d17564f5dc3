"""Adaptive explicit Runge-Kutta integration with dense output and events.

Dormand-Prince 5(4) embedded pair with the standard quartic dense-output
interpolant and PI stepsize control.  Events are zero crossings of scalar
functions of (t, y), located on the dense interpolant by bracketed bisection.

References
----------
Dormand & Prince (1980), J. Comp. Appl. Math. 6(1), 19-26.
Hairer, Norsett & Wanner, "Solving ODEs I", sec. II.4 (step control).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationError

# Butcher tableau
C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = np.zeros((7, 6))
A[1, :1] = [1 / 5]
A[2, :2] = [3 / 40, 9 / 40]
A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
B = np.append(A[6], 0.0)  # 5th-order weights (FSAL)
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense-output polynomial coefficients (order-4 interpolant for the pair)
P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
ALPHA = 0.7 / 5.0   # PI controller exponents
BETA = 0.4 / 5.0


@dataclass(frozen=True)
class EventSpec:
    """Zero crossing of f(t, y); direction 'any' | 'up' | 'down'."""
    id: str
    f: callable
    direction: str = "any"
    terminal: bool = False


@dataclass(frozen=True)
class EventRecord:
    t: float
    y: np.ndarray
    id: str


@dataclass
class Trajectory:
    """Accepted nodes, per-step dense interpolant, detected events.

    hsteps[k] is the stepsize the stage derivatives ks[k] were computed with;
    it differs from ts[k+1]-ts[k] only on a step truncated by a terminal event.
    """
    ts: np.ndarray                       # (N+1,)
    ys: np.ndarray                       # (N+1, n)
    ks: np.ndarray                       # (N, 7, n)
    hsteps: np.ndarray                   # (N,)
    events: list = field(default_factory=list)

    def __post_init__(self):
        for a in (self.ts, self.ys, self.ks, self.hsteps):
            a.setflags(write=False)

    @property
    def t_end(self):
        return float(self.ts[-1])

    @property
    def y_end(self):
        return self.ys[-1]

    @property
    def has_dense(self):
        return self.ks.shape[0] == self.ts.size - 1 and self.ks.shape[0] > 0

    def sol(self, t):
        """Dense-output evaluation at scalar or array t within the span."""
        if not self.has_dense:
            raise ValueError("trajectory was recorded without dense output")
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tq = np.atleast_1d(t).astype(float)
        sgn = 1.0 if self.ts[-1] >= self.ts[0] else -1.0
        k = np.clip(np.searchsorted(sgn * self.ts, sgn * tq, side="right") - 1,
                    0, self.ts.size - 2)
        out = np.empty((tq.size, self.ys.shape[1]))
        for i in range(tq.size):
            ki = k[i]
            theta = (tq[i] - self.ts[ki]) / self.hsteps[ki]
            out[i] = _dense_eval(self.ys[ki], self.ks[ki], self.hsteps[ki], theta)
        return out[0] if scalar else out


def _dense_eval(y0, K, h, theta):
    tv = np.array([theta, theta * theta, theta**3, theta**4])
    return y0 + h * (K.T @ (P @ tv))


def _initial_step(rhs, t0, y0, f0, direction, rtol, atol):
    scale = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * direction * f0
    f1 = rhs(t0 + h0 * direction, y1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def _locate_event(g, a, b, ga, tol):
    """Bisection for the sign change of g on the step interval [a, b]."""
    tm = a
    for _ in range(110):
        tm = 0.5 * (a + b)
        if tm == a or tm == b:
            break
        gm = g(tm)
        if (gm < 0.0) == (ga < 0.0):
            a, ga = tm, gm
        else:
            b = tm
        if abs(gm) <= tol and abs(b - a) <= 4.0 * np.finfo(float).eps * max(1.0, abs(tm)):
            break
    return tm


def integrate(rhs, y0, span, rtol=1e-10, atol=1e-10, events=(), max_step=np.inf,
              first_step=None, max_steps=10_000_000, event_tol=1e-12,
              fixed_step=None, record=True):
    """Integrate y' = rhs(t, y) over span = (t0, t1).

    Returns a Trajectory.  A terminal event truncates the integration and the
    event state becomes the final node.  Raises IntegrationError (carrying the
    last valid t, y) on stepsize underflow or step-count exhaustion.
    fixed_step bypasses error control (testing only); record=False keeps the
    endpoints and events but no dense output.
    """
    t0, t1 = float(span[0]), float(span[1])
    if t0 == t1:
        raise ValueError("empty integration span")
    direction = 1.0 if t1 > t0 else -1.0
    y0 = np.asarray(y0, dtype=float)
    y = y0.copy()
    n = y.size
    t = t0

    ts, ys, ks, hsteps = [t0], [y.copy()], [], []
    ev_records = []

    f = rhs(t, y)
    if fixed_step is not None:
        h = float(fixed_step)
    else:
        h = first_step if first_step is not None else _initial_step(rhs, t0, y, f, direction, rtol, atol)
    h = min(h, max_step, abs(t1 - t0))

    g_prev = [ev.f(t, y) for ev in events]
    err_prev = 1.0
    nsteps = 0
    K = np.empty((7, n))
    terminated = False
    tiny = 4.0 * np.finfo(float).eps

    while (t1 - t) * direction > tiny * max(abs(t), abs(t1)):
        if nsteps >= max_steps:
            raise IntegrationError("maximum number of steps exceeded", t=t, y=y.copy())
        nsteps += 1
        h = min(h, abs(t1 - t))
        if h <= abs(t) * np.finfo(float).eps * 4.0 + 1e-300:
            raise IntegrationError("stepsize underflow", t=t, y=y.copy())
        hs = h * direction

        K[0] = f
        for i in range(1, 7):
            K[i] = rhs(t + C[i] * hs, y + hs * (A[i, :i] @ K[:i]))
        y_new = y + hs * (B[:6] @ K[:6])
        K[6] = rhs(t + hs, y_new)  # FSAL stage doubles as error stage

        if fixed_step is None:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = np.sqrt(np.mean((hs * (E @ K) / scale) ** 2))
            if not np.isfinite(err):
                h *= 0.25
                continue
            if err > 1.0:
                h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
                err_prev = 1.0
                continue
            factor = SAFETY * (err + 1e-30) ** -ALPHA * err_prev ** BETA
            h_next = min(h * min(MAX_FACTOR, max(MIN_FACTOR, factor)), max_step)
            err_prev = max(err, 1e-10)
        else:
            h_next = float(fixed_step)

        t_new = t + hs
        t_stop, y_stop = t_new, y_new
        if events:
            g_new = [ev.f(t_new, y_new) for ev in events]
            hit = None
            for j, ev in enumerate(events):
                g0, g1 = g_prev[j], g_new[j]
                if not (np.isfinite(g0) and np.isfinite(g1)) or g0 == 0.0:
                    continue
                if not ((g0 < 0.0 <= g1) or (g0 > 0.0 >= g1)):
                    continue
                if ev.direction == "up" and not g0 < 0.0:
                    continue
                if ev.direction == "down" and not g0 > 0.0:
                    continue

                def gfun(tt, _f=ev.f):
                    return _f(tt, _dense_eval(y, K, hs, (tt - t) / hs))

                t_ev = _locate_event(gfun, t, t_new, g0, event_tol)
                y_ev = _dense_eval(y, K, hs, (t_ev - t) / hs)
                if hit is None or (t_ev - hit[0]) * direction < 0.0:
                    hit = (t_ev, y_ev, ev)
            g_prev = g_new
            if hit is not None:
                ev_records.append(EventRecord(t=hit[0], y=hit[1].copy(), id=hit[2].id))
                if hit[2].terminal:
                    t_stop, y_stop = hit[0], hit[1]
                    terminated = True

        if record:
            ts.append(t_stop)
            ys.append(y_stop.copy())
            ks.append(K.copy())
            hsteps.append(hs)
        t, y = t_stop, y_stop
        if terminated:
            break
        f = K[6].copy()
        h = h_next

    if record:
        traj = Trajectory(ts=np.asarray(ts), ys=np.asarray(ys),
                          ks=np.asarray(ks) if ks else np.zeros((0, 7, n)),
                          hsteps=np.asarray(hsteps))
    else:
        traj = Trajectory(ts=np.array([t0, t]), ys=np.array([y0, y]),
                          ks=np.zeros((0, 7, n)), hsteps=np.zeros(0))
    traj.events.extend(ev_records)
    return traj
