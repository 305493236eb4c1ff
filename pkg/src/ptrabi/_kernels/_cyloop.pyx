# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled adaptive Dormand-Prince stepper for d psi/dt = -i H(t) psi.

Twin of ``pyloop.propagate``: identical tableau, controller, drive
evaluation, and renormalization policy; the matrix-vector products are
straight C loops instead of BLAS calls.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, log, fabs, pow, isnan, isinf

cnp.import_array()

ctypedef double complex cplx

# Dormand-Prince 5(4) tableau; keep in sync with tableau.py
cdef double C2 = 1.0 / 5.0
cdef double C3 = 3.0 / 10.0
cdef double C4 = 4.0 / 5.0
cdef double C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0
cdef double A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0
cdef double A42 = -56.0 / 15.0
cdef double A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0
cdef double A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0
cdef double A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0
cdef double A62 = -355.0 / 33.0
cdef double A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0
cdef double A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0
cdef double B3 = 500.0 / 1113.0
cdef double B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0
cdef double B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0
cdef double E3 = -71.0 / 16695.0
cdef double E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0
cdef double E6 = 22.0 / 525.0
cdef double E7 = -1.0 / 40.0

cdef double SAFETY = 0.9
cdef double FAC_MIN = 0.2
cdef double FAC_MAX = 5.0
cdef double ORDER_EXPONENT = -0.2

DEF DRIVE_NONE = 0
DEF DRIVE_CONSTANT = 1
DEF DRIVE_CIRCULAR = 2
DEF DRIVE_ELLIPTICAL = 3


cdef inline cplx _gval(int kind, double t, double g0, double wg, double phix,
                       double phiy, double eta, double sign) noexcept nogil:
    cdef double ph, re, im
    if kind == DRIVE_NONE:
        return 0.0
    if kind == DRIVE_CONSTANT:
        return g0
    if kind == DRIVE_CIRCULAR:
        ph = sign * wg * t
        return g0 * cos(ph) + 1j * (g0 * sin(ph))
    re = g0 * cos(wg * t + phix)
    im = g0 * (eta * sin(wg * t + phiy))
    if sign < 0:
        im = -im
    return re + 1j * im


cdef void _rhs(double t, cplx[::1] v, cplx[::1] out, cplx[::1] diag,
               cplx[:, ::1] static, bint has_static,
               cplx[:, ::1] inter, bint has_inter,
               int kind, double g0, double wg, double phix, double phiy,
               double eta, double sign, int n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef cplx acc, g
    cdef cplx minus_i = -1j
    for i in range(n):
        out[i] = diag[i] * v[i]
    if has_static:
        for i in range(n):
            acc = 0
            for j in range(n):
                acc = acc + static[i, j] * v[j]
            out[i] = out[i] + acc
    if has_inter:
        g = _gval(kind, t, g0, wg, phix, phiy, eta, sign)
        for i in range(n):
            acc = 0
            for j in range(n):
                acc = acc + inter[i, j] * v[j]
            out[i] = out[i] + g * acc
    for i in range(n):
        out[i] = minus_i * out[i]


def propagate(y_in, double t0, double t1, diag_in, static_in, inter_in,
              int drive_kind, double g0, double wg, double phix, double phiy,
              double eta, double sign, double rtol, double atol,
              double h_init, double h_max, long max_steps):
    """Advance y from t0 to t1; same contract as pyloop.propagate."""
    cdef cnp.ndarray[cplx, ndim=1] y = np.array(y_in, dtype=np.complex128)
    cdef Py_ssize_t n = y.shape[0]
    cdef cnp.ndarray[cplx, ndim=1] diag = np.ascontiguousarray(diag_in, dtype=np.complex128)

    cdef bint has_static = static_in is not None
    cdef bint has_inter = inter_in is not None
    cdef cnp.ndarray[cplx, ndim=2] static_arr
    cdef cnp.ndarray[cplx, ndim=2] inter_arr
    if has_static:
        static_arr = np.ascontiguousarray(static_in, dtype=np.complex128)
    else:
        static_arr = np.zeros((1, 1), dtype=np.complex128)
    if has_inter:
        inter_arr = np.ascontiguousarray(inter_in, dtype=np.complex128)
    else:
        inter_arr = np.zeros((1, 1), dtype=np.complex128)
    cdef cplx[:, ::1] static_mv = static_arr
    cdef cplx[:, ::1] inter_mv = inter_arr
    cdef cplx[::1] diag_mv = diag
    cdef cplx[::1] y_mv = y

    cdef cnp.ndarray[cplx, ndim=1] k1 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] k2 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] k3 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] k4 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] k5 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] k6 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] k7 = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] ytmp = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cplx, ndim=1] y5 = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] k1_mv = k1, k2_mv = k2, k3_mv = k3, k4_mv = k4
    cdef cplx[::1] k5_mv = k5, k6_mv = k6, k7_mv = k7
    cdef cplx[::1] ytmp_mv = ytmp, y5_mv = y5

    cdef double log_norm = 0.0
    cdef long n_acc = 0, n_rej = 0, attempts = 0
    cdef double t = t0
    cdef double h, d0, d1, s, av, err, r, fac, cap, e_re, e_im, sc
    cdef bint clipped, last_rejected = False
    cdef Py_ssize_t i
    cdef cplx ev

    _rhs(t, y_mv, k1_mv, diag_mv, static_mv, has_static, inter_mv, has_inter,
         drive_kind, g0, wg, phix, phiy, eta, sign, n)

    if h_init > 0.0:
        h = h_init
    else:
        d0 = 0.0
        d1 = 0.0
        for i in range(n):
            s = atol + rtol * abs(y_mv[i])
            av = abs(y_mv[i]) / s
            d0 += av * av
            av = abs(k1_mv[i]) / s
            d1 += av * av
        d0 = sqrt(d0 / n)
        d1 = sqrt(d1 / n)
        if d0 > 1e-5 and d1 > 1e-5:
            h = 1e-2 * d0 / d1
        else:
            h = 1e-6
    if h > h_max:
        h = h_max
    if h > t1 - t0:
        h = t1 - t0

    while t < t1:
        attempts += 1
        if attempts > max_steps:
            return y, log_norm, h, n_acc, n_rej, 2
        if h > h_max:
            h = h_max
        clipped = h >= (t1 - t)
        if clipped:
            h = t1 - t
        if h < 1e-13 * max(1.0, fabs(t)):
            return y, log_norm, h, n_acc, n_rej, 1

        for i in range(n):
            ytmp_mv[i] = y_mv[i] + h * (A21 * k1_mv[i])
        _rhs(t + C2 * h, ytmp_mv, k2_mv, diag_mv, static_mv, has_static,
             inter_mv, has_inter, drive_kind, g0, wg, phix, phiy, eta, sign, n)
        for i in range(n):
            ytmp_mv[i] = y_mv[i] + h * (A31 * k1_mv[i] + A32 * k2_mv[i])
        _rhs(t + C3 * h, ytmp_mv, k3_mv, diag_mv, static_mv, has_static,
             inter_mv, has_inter, drive_kind, g0, wg, phix, phiy, eta, sign, n)
        for i in range(n):
            ytmp_mv[i] = y_mv[i] + h * (A41 * k1_mv[i] + A42 * k2_mv[i] + A43 * k3_mv[i])
        _rhs(t + C4 * h, ytmp_mv, k4_mv, diag_mv, static_mv, has_static,
             inter_mv, has_inter, drive_kind, g0, wg, phix, phiy, eta, sign, n)
        for i in range(n):
            ytmp_mv[i] = y_mv[i] + h * (A51 * k1_mv[i] + A52 * k2_mv[i]
                                        + A53 * k3_mv[i] + A54 * k4_mv[i])
        _rhs(t + C5 * h, ytmp_mv, k5_mv, diag_mv, static_mv, has_static,
             inter_mv, has_inter, drive_kind, g0, wg, phix, phiy, eta, sign, n)
        for i in range(n):
            ytmp_mv[i] = y_mv[i] + h * (A61 * k1_mv[i] + A62 * k2_mv[i] + A63 * k3_mv[i]
                                        + A64 * k4_mv[i] + A65 * k5_mv[i])
        _rhs(t + h, ytmp_mv, k6_mv, diag_mv, static_mv, has_static,
             inter_mv, has_inter, drive_kind, g0, wg, phix, phiy, eta, sign, n)
        for i in range(n):
            y5_mv[i] = y_mv[i] + h * (B1 * k1_mv[i] + B3 * k3_mv[i] + B4 * k4_mv[i]
                                      + B5 * k5_mv[i] + B6 * k6_mv[i])
        _rhs(t + h, y5_mv, k7_mv, diag_mv, static_mv, has_static,
             inter_mv, has_inter, drive_kind, g0, wg, phix, phiy, eta, sign, n)

        err = 0.0
        for i in range(n):
            ev = h * (E1 * k1_mv[i] + E3 * k3_mv[i] + E4 * k4_mv[i]
                      + E5 * k5_mv[i] + E6 * k6_mv[i] + E7 * k7_mv[i])
            sc = atol + rtol * max(abs(y_mv[i]), abs(y5_mv[i]))
            av = abs(ev) / sc
            err += av * av
        err = sqrt(err / n)

        if isnan(err) or isinf(err):
            n_rej += 1
            h *= 0.1
            last_rejected = True
            continue

        if err <= 1.0:
            t = t1 if clipped else t + h
            r = 0.0
            for i in range(n):
                y_mv[i] = y5_mv[i]
                r += y_mv[i].real * y_mv[i].real + y_mv[i].imag * y_mv[i].imag
            r = sqrt(r)
            if r == 0.0:
                return y, log_norm, h, n_acc, n_rej, 3
            if fabs(r - 1.0) >= 1e-12:
                for i in range(n):
                    y_mv[i] = y_mv[i] / r
                    k1_mv[i] = k7_mv[i] / r
                log_norm += log(r)
            else:
                for i in range(n):
                    k1_mv[i] = k7_mv[i]
            n_acc += 1
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = SAFETY * pow(err, ORDER_EXPONENT)
            cap = 1.0 if last_rejected else FAC_MAX
            h = h * min(cap, max(FAC_MIN, fac))
            last_rejected = False
        else:
            n_rej += 1
            fac = max(FAC_MIN, SAFETY * pow(err, ORDER_EXPONENT))
            h = h * min(1.0, fac)
            last_rejected = True

    return y, log_norm, h, n_acc, n_rej, 0
