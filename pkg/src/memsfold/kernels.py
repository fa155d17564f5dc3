"""JIT-compiled shooting kernels (Dormand-Prince 5(4), same scheme as integrate).

Only the hot inner loop lives here: the desingularized-field stepper with the
turning event w = 0, the collapse guard u < u_floor, and optional accumulation
of the norm integrals  A1 = int u^5 dtau,  A2 = int u^6 dtau  (which equal
int u dxi and int u^2 dxi since dxi = u^4 dtau).  Import this module only when
the numba backend is enabled; the pure-numpy path goes through
:func:`memsfold.integrate.integrate`.
"""
import numpy as np
from numba import njit

# shot outcome codes
TURN = 0
FLOOR = 1
TIME_CAP = 2
STEP_FAIL = 3
STEP_CAP = 4

# dense-output coefficients (same as integrate.P)
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

# 6-point Gauss-Legendre rule on [0, 1] for the per-step norm quadrature
_GX = 0.5 * (1.0 + np.array([-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                             0.2386191860831969, 0.6612093864662645, 0.9324695142031521]))
_GW = 0.5 * np.array([0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                      0.4679139345726910, 0.3607615730481386, 0.1713244923791704])


@njit(cache=True, nogil=True, inline="always")
def _field(u, w, lam, eps, out):
    u2 = u * u
    u4 = u2 * u2
    out[0] = u4 * w
    out[1] = lam * (u2 - eps * eps)
    out[2] = u4


@njit(cache=True, nogil=True)
def _dense_u(y0u, K, h, theta):
    t2 = theta * theta
    acc = 0.0
    for i in range(7):
        acc += K[i, 0] * (_P[i, 0] * theta + _P[i, 1] * t2 + _P[i, 2] * t2 * theta
                          + _P[i, 3] * t2 * t2)
    return y0u + h * acc


@njit(cache=True, nogil=True)
def _dense_w(y0w, K, h, theta):
    t2 = theta * theta
    acc = 0.0
    for i in range(7):
        acc += K[i, 1] * (_P[i, 0] * theta + _P[i, 1] * t2 + _P[i, 2] * t2 * theta
                          + _P[i, 3] * t2 * t2)
    return y0w + h * acc


@njit(cache=True, nogil=True)
def _dense_all(y0, K, h, theta, out):
    t2 = theta * theta
    p1 = theta
    p2 = t2
    p3 = t2 * theta
    p4 = t2 * t2
    for j in range(3):
        acc = 0.0
        for i in range(7):
            acc += K[i, j] * (_P[i, 0] * p1 + _P[i, 1] * p2 + _P[i, 2] * p3 + _P[i, 3] * p4)
        out[j] = y0[j] + h * acc


@njit(cache=True, nogil=True)
def _norm_chunk(y, K, h, theta_hi):
    """Gauss quadrature of (u^5, u^6) dtau over theta in [0, theta_hi] of one step."""
    a1 = 0.0
    a2 = 0.0
    for g in range(6):
        th = theta_hi * _GX[g]
        u = _dense_u(y[0], K, h, th)
        u5 = u * u * u * u * u
        a1 += _GW[g] * u5
        a2 += _GW[g] * u5 * u
    return h * theta_hi * a1, h * theta_hi * a2


@njit(cache=True, nogil=True)
def shoot(lam, eps, w0, rtol, atol, tau_max, max_steps, u_floor,
          record, ts_buf, ys_buf, with_norm):
    """Integrate (u, w, xi) from (1, w0, -1) until w crosses 0 upward.

    Returns (status, xi_end, u_end, tau_end, n_nodes, A1, A2).  When record is
    true the accepted nodes go to ts_buf/ys_buf with the turning state last.
    """
    y = np.empty(3)
    y[0] = 1.0
    y[1] = w0
    y[2] = -1.0
    t = 0.0
    k = np.empty((7, 3))
    ytmp = np.empty(3)
    ynew = np.empty(3)
    yev = np.empty(3)
    f = np.empty(3)
    _field(y[0], y[1], lam, eps, f)
    for j in range(3):
        k[0, j] = f[j]

    d1 = max(abs(f[0]), abs(f[1]), abs(f[2]))
    h = 1e-6 if d1 <= 1e-12 else 0.01 / d1
    if h > tau_max:
        h = tau_max

    a21 = 1.0 / 5.0
    a31, a32 = 3.0 / 40.0, 9.0 / 40.0
    a41, a42, a43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
    a51, a52, a53, a54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
    a61, a62, a63, a64, a65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                               49.0 / 176.0, -5103.0 / 18656.0)
    b1, b3, b4, b5, b6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
    e1, e3, e4, e5, e6, e7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                              -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

    nn = 0
    if record:
        ts_buf[0] = t
        for j in range(3):
            ys_buf[0, j] = y[j]
        nn = 1

    A1 = 0.0
    A2 = 0.0
    err_prev = 1.0
    nsteps = 0
    while t < tau_max:
        if nsteps >= max_steps or (record and nn >= ts_buf.shape[0] - 1):
            return STEP_CAP, y[2], y[0], t, nn, A1, A2
        nsteps += 1
        if h > tau_max - t:
            h = tau_max - t
        if h <= 4.0 * 2.220446049250313e-16 * t + 1e-300:
            return STEP_FAIL, y[2], y[0], t, nn, A1, A2

        for j in range(3):
            ytmp[j] = y[j] + h * a21 * k[0, j]
        _field(ytmp[0], ytmp[1], lam, eps, f)
        for j in range(3):
            k[1, j] = f[j]
            ytmp[j] = y[j] + h * (a31 * k[0, j] + a32 * k[1, j])
        _field(ytmp[0], ytmp[1], lam, eps, f)
        for j in range(3):
            k[2, j] = f[j]
            ytmp[j] = y[j] + h * (a41 * k[0, j] + a42 * k[1, j] + a43 * k[2, j])
        _field(ytmp[0], ytmp[1], lam, eps, f)
        for j in range(3):
            k[3, j] = f[j]
            ytmp[j] = y[j] + h * (a51 * k[0, j] + a52 * k[1, j] + a53 * k[2, j] + a54 * k[3, j])
        _field(ytmp[0], ytmp[1], lam, eps, f)
        for j in range(3):
            k[4, j] = f[j]
            ytmp[j] = y[j] + h * (a61 * k[0, j] + a62 * k[1, j] + a63 * k[2, j]
                                  + a64 * k[3, j] + a65 * k[4, j])
        _field(ytmp[0], ytmp[1], lam, eps, f)
        for j in range(3):
            k[5, j] = f[j]
            ynew[j] = y[j] + h * (b1 * k[0, j] + b3 * k[2, j] + b4 * k[3, j]
                                  + b5 * k[4, j] + b6 * k[5, j])
        _field(ynew[0], ynew[1], lam, eps, f)
        for j in range(3):
            k[6, j] = f[j]

        errn = 0.0
        for j in range(3):
            ej = h * (e1 * k[0, j] + e3 * k[2, j] + e4 * k[3, j] + e5 * k[4, j]
                      + e6 * k[5, j] + e7 * k[6, j])
            ya = abs(y[j])
            yb = abs(ynew[j])
            sc = atol + rtol * (ya if ya > yb else yb)
            r = ej / sc
            errn += r * r
        errn = np.sqrt(errn / 3.0)
        if not np.isfinite(errn):
            h *= 0.25
            continue
        if errn > 1.0:
            fac = 0.9 * errn ** -0.2
            if fac < 0.2:
                fac = 0.2
            h *= fac
            err_prev = 1.0
            continue
        fac = 0.9 * (errn + 1e-30) ** -0.14 * err_prev ** 0.08
        if fac > 10.0:
            fac = 10.0
        elif fac < 0.2:
            fac = 0.2
        h_next = h * fac
        err_prev = errn if errn > 1e-10 else 1e-10

        if y[1] < 0.0 <= ynew[1]:
            # turning event: bisect w on the dense interpolant
            a = 0.0
            bb = 1.0
            th = 0.5
            for _ in range(110):
                th = 0.5 * (a + bb)
                wm = _dense_w(y[1], k, h, th)
                if wm < 0.0:
                    a = th
                else:
                    bb = th
                if bb - a <= 1e-16:
                    break
            _dense_all(y, k, h, th, yev)
            yev[1] = 0.0
            if with_norm:
                da1, da2 = _norm_chunk(y, k, h, th)
                A1 += da1
                A2 += da2
            if record:
                ts_buf[nn] = t + th * h
                for j in range(3):
                    ys_buf[nn, j] = yev[j]
                nn += 1
            return TURN, yev[2], yev[0], t + th * h, nn, A1, A2

        if u_floor > 0.0 and ynew[0] < u_floor and ynew[1] < 0.0:
            return FLOOR, ynew[2], ynew[0], t + h, nn, A1, A2

        if with_norm:
            da1, da2 = _norm_chunk(y, k, h, 1.0)
            A1 += da1
            A2 += da2
        t += h
        for j in range(3):
            y[j] = ynew[j]
            k[0, j] = k[6, j]
        if record:
            ts_buf[nn] = t
            for j in range(3):
                ys_buf[nn, j] = y[j]
            nn += 1
        h = h_next

    return TIME_CAP, y[2], y[0], t, nn, A1, A2
