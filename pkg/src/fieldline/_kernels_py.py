"""Pure-Python Dormand-Prince 5(4) stepper for the planar Lorentz force.

Mirror of ``_kernels.pyx``; both expose ``dopri5`` with the same signature
and produce identical step sequences.  The caller picks one in
``fieldline.kernels``.
"""

import math

import numpy as np

# status codes
OK = 0
MAX_STEPS = 1
STEP_UNDERFLOW = 2
BAD_FIELD = 3

_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                 22 / 525, -1 / 40)


def _exp_shape(u):
    if abs(u) < 1e-4:
        return 1.0 - u / 2.0 + u * u / 6.0 - u * u * u / 24.0
    return -math.expm1(-u) / u


def field_value(code, p0, p1, u, bz=None):
    """B_z at gauge coordinate ``u`` for kernel ``code`` (see fields.py)."""
    if code == 0:
        return p0
    if code == 1:
        return p0 * math.exp(-u)
    if code == 2:
        return p0 + p1 / (u * u)
    if code == 3:
        return p0 * (_exp_shape(u) + math.exp(-u))
    if code == 4:
        return p0 + p1 / u
    return float(bz(u))


def _rhs(code, p0, p1, axis, qm, bz, s):
    x, y, vx, vy = s
    if axis == 0:
        u = y
    elif axis == 1:
        u = x
    else:
        u = math.sqrt(x * x + y * y)
    try:
        b = field_value(code, p0, p1, u, bz)
    except (ZeroDivisionError, OverflowError, ValueError):
        return None
    if not math.isfinite(b):
        return None
    w = qm * b
    return (vx, vy, w * vy, -w * vx)


def dopri5(code, p0, p1, axis, qm, state0, t_end, rtol, atol, h0, max_steps, bz=None):
    """Integrate from t=0 to ``t_end``; return accepted steps.

    Returns ``(ts, ys, fs, status)`` with ``ys``/``fs`` of shape (n, 4)
    holding the state and its time derivative at every accepted step.
    """
    y = tuple(float(v) for v in state0)
    f = _rhs(code, p0, p1, axis, qm, bz, y)
    if f is None:
        return np.zeros(1), np.array([y]), np.full((1, 4), np.nan), BAD_FIELD
    ts, ys, fs = [0.0], [y], [f]
    t = 0.0
    if h0 <= 0.0:
        d0 = d1 = 0.0
        for yi, fi in zip(y, f):
            sc = atol + rtol * abs(yi)
            d0 += (yi / sc) * (yi / sc)
            d1 += (fi / sc) * (fi / sc)
        d0 = math.sqrt(d0 / 4)
        d1 = math.sqrt(d1 / 4)
        h = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        h = min(h, t_end)
    else:
        h = min(h0, t_end)
    status = OK
    steps = 0
    rejected = False
    while t < t_end:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if h < 1e-14 * max(1.0, abs(t)):
            status = STEP_UNDERFLOW
            break
        if t + h > t_end:
            h = t_end - t
        steps += 1
        y0, y1, y2, y3 = y
        k1 = f
        s = [y[i] + h * _A21 * k1[i] for i in range(4)]
        k2 = _rhs(code, p0, p1, axis, qm, bz, s)
        if k2 is None:
            status = BAD_FIELD
            break
        s = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(4)]
        k3 = _rhs(code, p0, p1, axis, qm, bz, s)
        if k3 is None:
            status = BAD_FIELD
            break
        s = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(4)]
        k4 = _rhs(code, p0, p1, axis, qm, bz, s)
        if k4 is None:
            status = BAD_FIELD
            break
        s = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
             for i in range(4)]
        k5 = _rhs(code, p0, p1, axis, qm, bz, s)
        if k5 is None:
            status = BAD_FIELD
            break
        s = [y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i]
                         + _A65 * k5[i]) for i in range(4)]
        k6 = _rhs(code, p0, p1, axis, qm, bz, s)
        if k6 is None:
            status = BAD_FIELD
            break
        ynew = tuple(y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i]
                                 + _B6 * k6[i]) for i in range(4))
        k7 = _rhs(code, p0, p1, axis, qm, bz, ynew)
        if k7 is None:
            status = BAD_FIELD
            break
        acc = 0.0
        for i in range(4):
            e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i]
                     + _E7 * k7[i])
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            e = e / sc
            acc += e * e
        err = math.sqrt(acc / 4)
        if err <= 1.0:
            t = t + h
            y, f = ynew, k7
            ts.append(t)
            ys.append(y)
            fs.append(f)
            fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            if rejected:
                fac = min(fac, 1.0)
            rejected = False
            h *= fac
        else:
            rejected = True
            h *= max(0.2, 0.9 * err ** -0.2)
    return np.asarray(ts), np.asarray(ys, dtype=float), np.asarray(fs, dtype=float), status
