# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Dormand-Prince 5(4) stepper for the planar Lorentz force.

Same algorithm and signature as ``_kernels_py.dopri5``.  Built-in field
codes are evaluated in C; code -1 calls back into the Python ``bz``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, sqrt, isfinite, fmin, fmax, pow

cnp.import_array()

cdef enum:
    OK = 0
    MAX_STEPS = 1
    STEP_UNDERFLOW = 2
    BAD_FIELD = 3

cdef double C_A21 = 1.0 / 5
cdef double C_A31 = 3.0 / 40, C_A32 = 9.0 / 40
cdef double C_A41 = 44.0 / 45, C_A42 = -56.0 / 15, C_A43 = 32.0 / 9
cdef double C_A51 = 19372.0 / 6561, C_A52 = -25360.0 / 2187, C_A53 = 64448.0 / 6561
cdef double C_A54 = -212.0 / 729
cdef double C_A61 = 9017.0 / 3168, C_A62 = -355.0 / 33, C_A63 = 46732.0 / 5247
cdef double C_A64 = 49.0 / 176, C_A65 = -5103.0 / 18656
cdef double C_B1 = 35.0 / 384, C_B3 = 500.0 / 1113, C_B4 = 125.0 / 192
cdef double C_B5 = -2187.0 / 6784, C_B6 = 11.0 / 84
cdef double C_E1 = 71.0 / 57600, C_E3 = -71.0 / 16695, C_E4 = 71.0 / 1920
cdef double C_E5 = -17253.0 / 339200, C_E6 = 22.0 / 525, C_E7 = -1.0 / 40


cdef inline double _exp_shape(double u) nogil:
    if fabs(u) < 1e-4:
        return 1.0 - u / 2.0 + u * u / 6.0 - u * u * u / 24.0
    return -expm1(-u) / u


cdef class _Field:
    cdef int code, axis
    cdef double p0, p1, qm
    cdef object bz

    def __init__(self, int code, double p0, double p1, int axis, double qm, object bz):
        self.code = code
        self.p0 = p0
        self.p1 = p1
        self.axis = axis
        self.qm = qm
        self.bz = bz

    cdef int rhs(self, double* s, double* out) except -1:
        cdef double u, b, w
        if self.axis == 0:
            u = s[1]
        elif self.axis == 1:
            u = s[0]
        else:
            u = sqrt(s[0] * s[0] + s[1] * s[1])
        if self.code == 0:
            b = self.p0
        elif self.code == 1:
            b = self.p0 * exp(-u)
        elif self.code == 2:
            b = self.p0 + self.p1 / (u * u)
        elif self.code == 3:
            b = self.p0 * (_exp_shape(u) + exp(-u))
        elif self.code == 4:
            b = self.p0 + self.p1 / u
        else:
            try:
                b = float(self.bz(u))
            except (ZeroDivisionError, OverflowError, ValueError):
                return 0
        if not isfinite(b):
            return 0
        w = self.qm * b
        out[0] = s[2]
        out[1] = s[3]
        out[2] = w * s[3]
        out[3] = -w * s[2]
        return 1


def dopri5(int code, double p0, double p1, int axis, double qm, state0, double t_end,
           double rtol, double atol, double h0, long max_steps, bz=None):
    """Integrate from t=0 to ``t_end``; return ``(ts, ys, fs, status)``."""
    cdef _Field fld = _Field(code, p0, p1, axis, qm, bz)
    cdef double y[4]
    cdef double f[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double k5[4]
    cdef double k6[4]
    cdef double k7[4]
    cdef double s[4]
    cdef double ynew[4]
    cdef int i
    cdef double t = 0.0, h, err, acc, e, sc, fac, d0, d1
    cdef long steps = 0, n = 0, cap = 1024
    cdef int status = OK
    cdef bint rejected = False

    for i in range(4):
        y[i] = state0[i]
    ts_arr = np.empty(cap)
    ys_arr = np.empty((cap, 4))
    fs_arr = np.empty((cap, 4))
    cdef double[:] ts = ts_arr
    cdef double[:, :] ys = ys_arr
    cdef double[:, :] fs = fs_arr

    if not fld.rhs(y, f):
        return (np.zeros(1), np.array([[y[0], y[1], y[2], y[3]]]),
                np.full((1, 4), np.nan), BAD_FIELD)
    ts[0] = 0.0
    for i in range(4):
        ys[0, i] = y[i]
        fs[0, i] = f[i]
    n = 1

    if h0 <= 0.0:
        d0 = 0.0
        d1 = 0.0
        for i in range(4):
            sc = atol + rtol * fabs(y[i])
            d0 += (y[i] / sc) * (y[i] / sc)
            d1 += (f[i] / sc) * (f[i] / sc)
        d0 = sqrt(d0 / 4)
        d1 = sqrt(d1 / 4)
        if d0 < 1e-5 or d1 < 1e-5:
            h = 1e-6
        else:
            h = 0.01 * d0 / d1
        h = fmin(h, t_end)
    else:
        h = fmin(h0, t_end)

    while t < t_end:
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if h < 1e-14 * fmax(1.0, fabs(t)):
            status = STEP_UNDERFLOW
            break
        if t + h > t_end:
            h = t_end - t
        steps += 1
        for i in range(4):
            s[i] = y[i] + h * C_A21 * f[i]
        if not fld.rhs(s, k2):
            status = BAD_FIELD
            break
        for i in range(4):
            s[i] = y[i] + h * (C_A31 * f[i] + C_A32 * k2[i])
        if not fld.rhs(s, k3):
            status = BAD_FIELD
            break
        for i in range(4):
            s[i] = y[i] + h * (C_A41 * f[i] + C_A42 * k2[i] + C_A43 * k3[i])
        if not fld.rhs(s, k4):
            status = BAD_FIELD
            break
        for i in range(4):
            s[i] = y[i] + h * (C_A51 * f[i] + C_A52 * k2[i] + C_A53 * k3[i] + C_A54 * k4[i])
        if not fld.rhs(s, k5):
            status = BAD_FIELD
            break
        for i in range(4):
            s[i] = y[i] + h * (C_A61 * f[i] + C_A62 * k2[i] + C_A63 * k3[i] + C_A64 * k4[i]
                               + C_A65 * k5[i])
        if not fld.rhs(s, k6):
            status = BAD_FIELD
            break
        for i in range(4):
            ynew[i] = y[i] + h * (C_B1 * f[i] + C_B3 * k3[i] + C_B4 * k4[i] + C_B5 * k5[i]
                                  + C_B6 * k6[i])
        if not fld.rhs(ynew, k7):
            status = BAD_FIELD
            break
        acc = 0.0
        for i in range(4):
            e = h * (C_E1 * f[i] + C_E3 * k3[i] + C_E4 * k4[i] + C_E5 * k5[i] + C_E6 * k6[i]
                     + C_E7 * k7[i])
            sc = atol + rtol * fmax(fabs(y[i]), fabs(ynew[i]))
            e = e / sc
            acc += e * e
        err = sqrt(acc / 4)
        if err <= 1.0:
            t = t + h
            for i in range(4):
                y[i] = ynew[i]
                f[i] = k7[i]
            if n == cap:
                cap *= 2
                ts_arr = np.resize(ts_arr, cap)
                ys_arr = np.resize(ys_arr, (cap, 4))
                fs_arr = np.resize(fs_arr, (cap, 4))
                ts = ts_arr
                ys = ys_arr
                fs = fs_arr
            ts[n] = t
            for i in range(4):
                ys[n, i] = y[i]
                fs[n, i] = f[i]
            n += 1
            if err == 0.0:
                fac = 5.0
            else:
                fac = fmin(5.0, fmax(0.2, 0.9 * pow(err, -0.2)))
            if rejected:
                fac = fmin(fac, 1.0)
            rejected = False
            h *= fac
        else:
            rejected = True
            h *= fmax(0.2, 0.9 * pow(err, -0.2))
    return ts_arr[:n].copy(), ys_arr[:n].copy(), fs_arr[:n].copy(), status
