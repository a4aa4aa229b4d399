"""Pure-numpy integration kernels (fallback when numba is disabled or missing).

Same algorithm and return conventions as :mod:`qriccati._kernels_numba`;
results agree to rounding.
"""
import math

import numpy as np

from ._tableau import A, B4, B5, C, E, STATUS_COMPLETED, STATUS_ESCAPED, STATUS_STEP_LIMIT

TWO_PI = 2.0 * math.pi
EPS = np.finfo(float).eps


def _qmul(p, q):
    return np.array(
        [
            p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
            p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
            p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
            p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0],
        ]
    )


def eval_coefficients(consts, cos, sin, T, t):
    x = t / T
    phase = TWO_PI * (x - math.floor(x))
    K = cos.shape[2]
    if K == 0:
        return consts.copy()
    ph = np.arange(1, K + 1) * phase
    return consts + cos @ np.cos(ph) + sin @ np.sin(ph)


def rhs(consts, cos, sin, T, t, q):
    a, b, c, d = eval_coefficients(consts, cos, sin, T, t)
    return -(_qmul(_qmul(q, a), q) + _qmul(b, q) + _qmul(q, c) + d)


rhs_single = rhs


def integrate(consts, cos, sin, T, q0, t0, t1, rtol, atol, max_step, escape_norm, max_steps, store):
    k = np.empty((7, 4))
    y = np.array(q0, dtype=float)
    t = t0
    k[0] = rhs(consts, cos, sin, T, t, y)
    nfev = 1
    ts, qs, fs = [t], [y.copy()], [k[0].copy()]
    status = STATUS_COMPLETED
    span = t1 - t0
    if span <= 0.0:
        return np.array(ts), np.array(qs), np.array(fs), status, nfev

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
            ytmp = y + h * (A[s, :s] @ k[:s])
            k[s] = rhs(consts, cos, sin, T, t + C[s] * h, ytmp)
        nfev += 6
        steps += 1
        ynew = ytmp
        e = h * (E @ k)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = math.sqrt(float(np.mean((e / sc) ** 2)))
        if not np.all(np.isfinite(ynew)) or not math.isfinite(err):
            h *= 0.2
            if h <= 16.0 * EPS * max(abs(t), 1.0):
                status = STATUS_STEP_LIMIT
                break
            continue
        if err <= 1.0:
            t = t1 if last else t + h
            y = ynew.copy()
            k[0] = k[6]
            if store:
                ts.append(t)
                qs.append(y.copy())
                fs.append(k[0].copy())
            if math.sqrt(float(y @ y)) > escape_norm:
                status = STATUS_ESCAPED
                break
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err**-0.2))
        else:
            fac = max(0.2, 0.9 * err**-0.2)
        h = min(h * fac, max_step)
        if h <= 16.0 * EPS * max(abs(t), 1.0):
            status = STATUS_STEP_LIMIT
            break
    if not store:
        ts.append(t)
        qs.append(y.copy())
        fs.append(k[0].copy())
    return np.array(ts), np.array(qs), np.array(fs), status, nfev


def integrate_fixed(consts, cos, sin, T, q0, t0, t1, n_steps, order):
    k = np.empty((7, 4))
    y = np.array(q0, dtype=float)
    h = (t1 - t0) / n_steps
    B = B5 if order == 5 else B4
    for i in range(n_steps):
        t = t0 + i * h
        k[0] = rhs(consts, cos, sin, T, t, y)
        for s in range(1, 7):
            k[s] = rhs(consts, cos, sin, T, t + C[s] * h, y + h * (A[s, :s] @ k[:s]))
        y = y + h * (B @ k)
    return y
