"""Compiled Dormand-Prince 5(4) integrator for the rate equations.

Species parameters are packed as rows ``[gamma0, gamma_np, b1, b2, b3, gamma_d]``
and interactions as ``[c3_self * rho0, c3_cross * rho0]``.
"""

import numpy as np
from numba import njit

OK = 0
STEP_UNDERFLOW = -1
TOO_MANY_STEPS = -2

# Dormand & Prince (1980) tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40


@njit(cache=True)
def rhs(y, sp, inter, om2, d4, out):
    n = sp.shape[0]
    for i in range(n):
        j = 3 * i
        nn = y[j + 2]
        nn_self = nn if nn > 0.0 else 0.0
        nn_other = 0.0
        if n == 2:
            o = y[3 * (1 - i) + 2]
            nn_other = o if o > 0.0 else 0.0
        g0 = sp[i, 0]
        gam = g0 + inter[0] * nn_self + inter[1] * nn_other
        r = gam * om2[i] / (d4[i] + gam * gam)
        ng = y[j]
        nr = y[j + 1]
        e = (ng - nr) * r
        out[j] = -e + sp[i, 2] * g0 * nr + sp[i, 4] * sp[i, 1] * nn - sp[i, 5] * ng
        out[j + 1] = e - g0 * nr
        out[j + 2] = sp[i, 3] * g0 * nr - sp[i, 1] * nn


@njit(cache=True)
def segment(y0, t_eval, sp, inter, om2, d4, rtol, atol, h0, max_steps):
    """Integrate from ``t_eval[0]`` through every later ``t_eval`` point.

    Steps are shortened to land exactly on each output time. Returns
    ``(states, status, t_last, h_last)``.
    """
    m = y0.shape[0]
    n_out = t_eval.shape[0]
    out = np.empty((n_out, m))
    out[0] = y0
    y = y0.copy()
    k1 = np.empty(m)
    k2 = np.empty(m)
    k3 = np.empty(m)
    k4 = np.empty(m)
    k5 = np.empty(m)
    k6 = np.empty(m)
    k7 = np.empty(m)
    tmp = np.empty(m)
    ynew = np.empty(m)
    t = t_eval[0]
    t_final = t_eval[n_out - 1]
    span = t_final - t
    h = h0
    if h <= 0.0 or h > span:
        h = span * 1e-2
    rhs(y, sp, inter, om2, d4, k1)
    nxt = 1
    steps = 0
    while nxt < n_out:
        target = t_eval[nxt]
        landing = False
        if t + h >= target:
            h_try = target - t
            landing = True
        else:
            h_try = h
        min_h = 1e-13 * max(abs(t), span)
        if h_try < min_h and not landing:
            return out, STEP_UNDERFLOW, t, h
        steps += 1
        if steps > max_steps:
            return out, TOO_MANY_STEPS, t, h

        for q in range(m):
            tmp[q] = y[q] + h_try * A21 * k1[q]
        rhs(tmp, sp, inter, om2, d4, k2)
        for q in range(m):
            tmp[q] = y[q] + h_try * (A31 * k1[q] + A32 * k2[q])
        rhs(tmp, sp, inter, om2, d4, k3)
        for q in range(m):
            tmp[q] = y[q] + h_try * (A41 * k1[q] + A42 * k2[q] + A43 * k3[q])
        rhs(tmp, sp, inter, om2, d4, k4)
        for q in range(m):
            tmp[q] = y[q] + h_try * (A51 * k1[q] + A52 * k2[q] + A53 * k3[q] + A54 * k4[q])
        rhs(tmp, sp, inter, om2, d4, k5)
        for q in range(m):
            tmp[q] = y[q] + h_try * (A61 * k1[q] + A62 * k2[q] + A63 * k3[q] + A64 * k4[q] + A65 * k5[q])
        rhs(tmp, sp, inter, om2, d4, k6)
        for q in range(m):
            ynew[q] = y[q] + h_try * (B1 * k1[q] + B3 * k3[q] + B4 * k4[q] + B5 * k5[q] + B6 * k6[q])
        rhs(ynew, sp, inter, om2, d4, k7)

        err = 0.0
        for q in range(m):
            e = h_try * (E1 * k1[q] + E3 * k3[q] + E4 * k4[q] + E5 * k5[q] + E6 * k6[q] + E7 * k7[q])
            sc = atol + rtol * max(abs(y[q]), abs(ynew[q]))
            err += (e / sc) ** 2
        err = np.sqrt(err / m)

        if err <= 1.0:
            t = target if landing else t + h_try
            for q in range(m):
                y[q] = ynew[q]
                k1[q] = k7[q]
            if landing:
                out[nxt] = y
                nxt += 1
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
            # a landing step may be artificially short; do not let it shrink h
            h_new = h_try * fac
            h = max(h, h_new) if landing else h_new
        else:
            h = h_try * max(0.2, 0.9 * err ** -0.2)
    return out, OK, t, h
