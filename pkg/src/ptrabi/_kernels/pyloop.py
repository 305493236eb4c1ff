"""Pure-numpy adaptive Dormand-Prince stepper for d psi/dt = -i H(t) psi.

Twin of the compiled kernel in ``_cyloop.pyx``: same tableau, same step
controller, same renormalization policy.  The two are not bit-identical
(BLAS matvec summation order differs from the C loops) but agree to within
the integration tolerance; each one individually is fully deterministic.

H(t) = diag + static + g(t) * interaction, with g(t) evaluated inside the
step loop exactly as ``ptrabi.drive.evaluate_drive`` does.

The state is rescaled to unit norm after every accepted step and the factor
accumulated as a log; rescaling commutes with the linear flow (FSAL stage
included), so observables are unaffected.  Rescales within 1e-12 of unity
are skipped entirely, which keeps renormalization a strict no-op on an
already-normalized state.
"""

from __future__ import annotations

import math

import numpy as np

from . import tableau as tb

DRIVE_NONE = 0
DRIVE_CONSTANT = 1
DRIVE_CIRCULAR = 2
DRIVE_ELLIPTICAL = 3


def _gval(kind, t, g0, wg, phix, phiy, eta, sign):
    if kind == DRIVE_NONE:
        return 0.0j
    if kind == DRIVE_CONSTANT:
        return complex(g0)
    if kind == DRIVE_CIRCULAR:
        ph = sign * wg * t
        return g0 * complex(math.cos(ph), math.sin(ph))
    re = g0 * math.cos(wg * t + phix)
    im = g0 * (eta * math.sin(wg * t + phiy))
    return complex(re, -im) if sign < 0 else complex(re, im)


def propagate(
    y,
    t0,
    t1,
    diag,
    static,
    inter,
    drive_kind,
    g0,
    wg,
    phix,
    phiy,
    eta,
    sign,
    rtol,
    atol,
    h_init,
    h_max,
    max_steps,
):
    """Advance y from t0 to t1.

    Returns (y, log_norm_delta, h_last, n_accepted, n_rejected, status).
    """
    y = np.array(y, dtype=np.complex128)
    n = y.size

    def rhs(t, v):
        out = diag * v
        if static is not None:
            out = out + static @ v
        if inter is not None:
            g = _gval(drive_kind, t, g0, wg, phix, phiy, eta, sign)
            out = out + g * (inter @ v)
        return -1j * out

    log_norm = 0.0
    n_acc = 0
    n_rej = 0
    t = t0
    k1 = rhs(t, y)

    if h_init > 0.0:
        h = h_init
    else:
        sc = atol + rtol * np.abs(y)
        d0 = math.sqrt(float(np.mean(np.abs(y / sc) ** 2)))
        d1 = math.sqrt(float(np.mean(np.abs(k1 / sc) ** 2)))
        h = 1e-2 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6
    h = min(h, h_max, t1 - t0)

    last_rejected = False
    attempts = 0
    while t < t1:
        attempts += 1
        if attempts > max_steps:
            return y, log_norm, h, n_acc, n_rej, tb.STATUS_MAX_STEPS
        h = min(h, h_max)
        clipped = h >= (t1 - t)
        if clipped:
            h = t1 - t
        if h < 1e-13 * max(1.0, abs(t)):
            return y, log_norm, h, n_acc, n_rej, tb.STATUS_STEP_UNDERFLOW

        k2 = rhs(t + tb.C2 * h, y + h * (tb.A21 * k1))
        k3 = rhs(t + tb.C3 * h, y + h * (tb.A31 * k1 + tb.A32 * k2))
        k4 = rhs(t + tb.C4 * h, y + h * (tb.A41 * k1 + tb.A42 * k2 + tb.A43 * k3))
        k5 = rhs(
            t + tb.C5 * h,
            y + h * (tb.A51 * k1 + tb.A52 * k2 + tb.A53 * k3 + tb.A54 * k4),
        )
        k6 = rhs(
            t + h,
            y + h * (tb.A61 * k1 + tb.A62 * k2 + tb.A63 * k3 + tb.A64 * k4 + tb.A65 * k5),
        )
        y5 = y + h * (tb.B1 * k1 + tb.B3 * k3 + tb.B4 * k4 + tb.B5 * k5 + tb.B6 * k6)
        k7 = rhs(t + h, y5)
        errvec = h * (
            tb.E1 * k1 + tb.E3 * k3 + tb.E4 * k4 + tb.E5 * k5 + tb.E6 * k6 + tb.E7 * k7
        )
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = math.sqrt(float(np.mean(np.abs(errvec / sc) ** 2)))

        if math.isnan(err) or math.isinf(err):
            n_rej += 1
            h *= 0.1
            last_rejected = True
            continue

        if err <= 1.0:
            t = t1 if clipped else t + h
            y = y5
            r = float(np.linalg.norm(y))
            if r == 0.0:
                return y, log_norm, h, n_acc, n_rej, tb.STATUS_ZERO_NORM
            if abs(r - 1.0) >= 1e-12:
                y = y / r
                log_norm += math.log(r)
                k1 = k7 / r
            else:
                k1 = k7
            n_acc += 1
            fac = tb.FAC_MAX if err == 0.0 else tb.SAFETY * err**tb.ORDER_EXPONENT
            cap = 1.0 if last_rejected else tb.FAC_MAX
            h = h * min(cap, max(tb.FAC_MIN, fac))
            last_rejected = False
        else:
            n_rej += 1
            fac = max(tb.FAC_MIN, tb.SAFETY * err**tb.ORDER_EXPONENT)
            h = h * min(1.0, fac)
            last_rejected = True

    return y, log_norm, h, n_acc, n_rej, tb.STATUS_OK
