"""numba-compiled integration kernels.

Signatures mirror :mod:`qriccati._kernels_numpy` exactly; the dispatcher in
:mod:`qriccati.kernels` picks one of the two.
"""
import math

import numpy as np
from numba import njit

from ._tableau import A, B4, B5, C, E, STATUS_COMPLETED, STATUS_ESCAPED, STATUS_STEP_LIMIT

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _qmul(p, q, out):
    out[0] = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3]
    out[1] = p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2]
    out[2] = p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1]
    out[3] = p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]


@njit(cache=True)
def eval_coefficients(consts, cos, sin, T, t, out):
    """Fill ``out[i, n]`` with component n of coefficient i (a, b, c, d) at t."""
    K = cos.shape[2]
    x = t / T
    phase = TWO_PI * (x - math.floor(x))
    for i in range(4):
        for n in range(4):
            out[i, n] = consts[i, n]
    for k in range(K):
        ck = math.cos((k + 1) * phase)
        sk = math.sin((k + 1) * phase)
        for i in range(4):
            for n in range(4):
                out[i, n] += cos[i, n, k] * ck + sin[i, n, k] * sk


@njit(cache=True)
def rhs(consts, cos, sin, T, t, q, out, coef, w1, w2):
    """``out = -(q a q + b q + q c + d)``; ``coef``, ``w1``, ``w2`` are scratch."""
    eval_coefficients(consts, cos, sin, T, t, coef)
    _qmul(q, coef[0], w1)
    _qmul(w1, q, w2)
    for n in range(4):
        out[n] = w2[n] + coef[3, n]
    _qmul(coef[1], q, w1)
    for n in range(4):
        out[n] += w1[n]
    _qmul(q, coef[2], w1)
    for n in range(4):
        out[n] = -(out[n] + w1[n])


@njit(cache=True)
def rhs_single(consts, cos, sin, T, t, q):
    out = np.empty(4)
    coef = np.empty((4, 4))
    w1 = np.empty(4)
    w2 = np.empty(4)
    rhs(consts, cos, sin, T, t, q, out, coef, w1, w2)
    return out


@njit(cache=True)
def _grow(buf, n):
    new = np.empty((buf.shape[0] * 2,) + buf.shape[1:])
    new[:n] = buf[:n]
    return new


@njit(cache=True)
def integrate(consts, cos, sin, T, q0, t0, t1, rtol, atol, max_step, escape_norm, max_steps, store):
    """Adaptive Dormand-Prince 5(4) from ``t0`` to ``t1``.

    Returns ``(ts, qs, fs, status, nfev)``; ``fs`` holds the right-hand side at
    every stored point (used for Hermite dense output). With ``store`` false
    only the initial and final points are returned.
    """
    cap = 256 if store else 2
    ts = np.empty(cap)
    qs = np.empty((cap, 4))
    fs = np.empty((cap, 4))
    k = np.empty((7, 4))
    coef = np.empty((4, 4))
    w1 = np.empty(4)
    w2 = np.empty(4)
    y = q0.copy()
    ytmp = np.empty(4)
    ynew = np.empty(4)

    t = t0
    rhs(consts, cos, sin, T, t, y, k[0], coef, w1, w2)
    nfev = 1
    ts[0] = t
    qs[0] = y
    fs[0] = k[0]
    n = 1
    status = STATUS_COMPLETED
    span = t1 - t0
    if span <= 0.0:
        return ts[:1], qs[:1], fs[:1], status, nfev

    h = min(max_step, span, 0.01 * T)
    steps = 0
    while t < t1:
        if steps >= max_steps:
            status = STATUS_STEP_LIMIT
            break
        last = False
        if t + h >= t1:
            h = t1 - t
            last = True
        for s in range(1, 7):
            for m in range(4):
                acc = 0.0
                for r in range(s):
                    acc += A[s, r] * k[r, m]
                ytmp[m] = y[m] + h * acc
            rhs(consts, cos, sin, T, t + C[s] * h, ytmp, k[s], coef, w1, w2)
        nfev += 6
        steps += 1
        # k[6] was evaluated at ytmp == 5th-order solution (FSAL row)
        err = 0.0
        finite = True
        for m in range(4):
            ynew[m] = ytmp[m]
            e = 0.0
            for r in range(7):
                e += E[r] * k[r, m]
            e *= h
            sc = atol + rtol * max(abs(y[m]), abs(ynew[m]))
            err += (e / sc) ** 2
            if not math.isfinite(ynew[m]):
                finite = False
        err = math.sqrt(err / 4.0)
        if not finite or not math.isfinite(err):
            h *= 0.2
            if h <= 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
                status = STATUS_STEP_LIMIT
                break
            continue
        if err <= 1.0:
            t = t1 if last else t + h
            for m in range(4):
                y[m] = ynew[m]
                k[0, m] = k[6, m]
            if store:
                if n >= ts.shape[0]:
                    ts = _grow(ts, n)
                    qs = _grow(qs, n)
                    fs = _grow(fs, n)
                ts[n] = t
                qs[n] = y
                fs[n] = k[0]
                n += 1
            nrm = math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] + y[3] * y[3])
            if nrm > escape_norm:
                status = STATUS_ESCAPED
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h = min(h * fac, max_step)
        if h <= 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
            status = STATUS_STEP_LIMIT
            break
    if not store:
        ts[1] = t
        qs[1] = y
        fs[1] = k[0]
        n = 2
    return ts[:n], qs[:n], fs[:n], status, nfev


@njit(cache=True)
def integrate_fixed(consts, cos, sin, T, q0, t0, t1, n_steps, order):
    """Fixed-step Dormand-Prince; ``order`` 5 or 4 selects the propagated weights."""
    k = np.empty((7, 4))
    coef = np.empty((4, 4))
    w1 = np.empty(4)
    w2 = np.empty(4)
    y = q0.copy()
    ytmp = np.empty(4)
    h = (t1 - t0) / n_steps
    B = B5 if order == 5 else B4
    for i in range(n_steps):
        t = t0 + i * h
        rhs(consts, cos, sin, T, t, y, k[0], coef, w1, w2)
        for s in range(1, 7):
            for m in range(4):
                acc = 0.0
                for r in range(s):
                    acc += A[s, r] * k[r, m]
                ytmp[m] = y[m] + h * acc
            rhs(consts, cos, sin, T, t + C[s] * h, ytmp, k[s], coef, w1, w2)
        for m in range(4):
            acc = 0.0
            for r in range(7):
                acc += B[r] * k[r, m]
            y[m] = y[m] + h * acc
    return y
