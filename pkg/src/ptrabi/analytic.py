"""Closed-form side of the theory: hyperbolic flow coefficients, the
instanton trajectory, the double-well auxiliary field, the Euclidean
action, and the generalized complex Riccati flow with its fixed points.

Everything here is implemented exactly as the formulas state, independently
of the simulator, so that full-model numerics can be compared against the
analytic claims rather than calibrated to them.  The rate parameter
``alpha`` is treated as a free parameter throughout; ``alpha = g0`` is the
default cross-module mapping, and the ensemble layer fits alpha from
simulated trajectories instead of assuming it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from ._kernels import tableau as tb
from .hamiltonian import CouplingVector
from .hilbert import BlochVector

__all__ = [
    "WeiNormanCoefficients",
    "InstantonAuxiliary",
    "RiccatiResult",
    "RiccatiFixedPoint",
    "wei_norman_evaluate",
    "wei_norman_ode_residual",
    "instanton_sigma_z",
    "auxiliary_flow",
    "double_well_potential",
    "euclidean_potential",
    "euclidean_action",
    "riccati_rhs",
    "riccati_evolve",
    "riccati_fixed_points",
    "attractor_direction",
]


def _log_cosh(x: float) -> float:
    # overflow-safe log(cosh(x)) for x >= 0
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


@dataclass(frozen=True)
class WeiNormanCoefficients:
    """Coefficient functions of the ordered-exponential ansatz, sampled on a grid.

    The two ladder coefficients coincide identically (f1 = f2) and
    Im f1 saturates from 0 toward 1 as t grows.
    """

    times: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    alpha: float
    omega_0: float

    def __post_init__(self):
        if not np.array_equal(self.f1, self.f2):
            raise ValueError("the two ladder coefficients must coincide")


def wei_norman_evaluate(alpha: float, omega_0: float, times: Sequence[float]) -> WeiNormanCoefficients:
    """Closed-form coefficients: f0 = ω0 t, f1 = f2 = i tanh(αt), f3 = log cosh(αt)."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    t = np.asarray(times, dtype=np.float64)
    if t.size and t.min() < 0:
        raise ValueError("times must be non-negative")
    f1 = 1j * np.tanh(alpha * t)
    f3 = np.array([_log_cosh(alpha * ti) for ti in t], dtype=np.complex128)
    return WeiNormanCoefficients(
        times=t,
        f0=(omega_0 * t).astype(np.complex128),
        f1=f1.astype(np.complex128),
        f2=f1.astype(np.complex128),
        f3=f3,
        alpha=float(alpha),
        omega_0=float(omega_0),
    )


def wei_norman_ode_residual(coeffs: WeiNormanCoefficients, times: Optional[Sequence[float]] = None) -> float:
    """Max |central finite difference - flow right-hand side| over the grid.

    The four equations checked are f0' = ω0, f1' = iα(1 + f1²),
    f2' = iα(1 + f1 f2), f3' = -iα f2.  Interior grid points only.
    """
    t = coeffs.times if times is None else np.asarray(times, dtype=np.float64)
    if times is not None and not np.array_equal(t, coeffs.times):
        raise ValueError("times must match the grid the coefficients were evaluated on")
    if t.size < 3:
        raise ValueError("need at least 3 grid points for central differences")
    a = coeffs.alpha
    dt = np.diff(t)

    def dnum(f):
        return (f[2:] - f[:-2]) / (dt[1:] + dt[:-1])

    mid = slice(1, -1)
    res = [
        np.abs(dnum(coeffs.f0) - coeffs.omega_0),
        np.abs(dnum(coeffs.f1) - 1j * a * (1.0 + coeffs.f1[mid] ** 2)),
        np.abs(dnum(coeffs.f2) - 1j * a * (1.0 + coeffs.f1[mid] * coeffs.f2[mid])),
        np.abs(dnum(coeffs.f3) - (-1j) * a * coeffs.f2[mid]),
    ]
    return float(max(r.max() for r in res))


def instanton_sigma_z(sigma_z0: float, alpha: float, t) -> np.ndarray | float:
    """Closed-form spin trajectory sigma_z0 (1 - 2 tanh(αt)), taken verbatim."""
    if not -1.0 <= sigma_z0 <= 1.0:
        raise ValueError(f"sigma_z0 must lie in [-1, 1], got {sigma_z0}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t = np.asarray(t, dtype=np.float64)
    out = sigma_z0 * (1.0 - 2.0 * np.tanh(alpha * t))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class InstantonAuxiliary:
    """Auxiliary population coordinate x = (1 - <sigma_z>)/2 and its rate."""

    x: float
    alpha: float

    def gradient_potential(self) -> float:
        return -self.alpha * (self.x - self.x**3 / 3.0)

    def euclidean_potential(self) -> float:
        return 0.5 * self.alpha**2 * (1.0 - self.x**2) ** 2

    def flow_rhs(self) -> float:
        return self.alpha * (1.0 - self.x**2)


def double_well_potential(x, alpha: float):
    """U(x) = -α (x - x³/3); the flow is the gradient descent of U."""
    x = np.asarray(x, dtype=np.float64)
    out = -alpha * (x - x**3 / 3.0)
    return float(out) if out.ndim == 0 else out


def euclidean_potential(x, alpha: float):
    """V(x) = α²/2 (1 - x²)², the Wick-rotated double well."""
    x = np.asarray(x, dtype=np.float64)
    out = 0.5 * alpha**2 * (1.0 - x**2) ** 2
    return float(out) if out.ndim == 0 else out


def auxiliary_flow(x0: float, alpha: float, times: Sequence[float]) -> np.ndarray:
    """Closed-form kink x(t) = tanh(αt + atanh(x0)); fixed points x = ±1 are constants."""
    if not -1.0 <= x0 <= 1.0:
        raise ValueError(f"x0 must lie in [-1, 1], got {x0}")
    t = np.asarray(times, dtype=np.float64)
    if abs(x0) == 1.0:
        return np.full(t.shape, x0, dtype=np.float64)
    return np.tanh(alpha * t + math.atanh(x0))


def euclidean_action(alpha: float) -> float:
    """Closed-form kink action 4α/3, cross-checked against the quadrature
    of ∫√(2V) over the well before being returned."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    closed = 4.0 * alpha / 3.0
    numeric, _ = quad(lambda x: math.sqrt(2.0 * euclidean_potential(x, alpha)), -1.0, 1.0)
    if abs(closed - numeric) > 1e-10 * max(1.0, closed):
        raise AssertionError(
            f"action quadrature {numeric!r} disagrees with closed form {closed!r}"
        )
    return closed


def riccati_rhs(alpha_vec: CouplingVector, f1: complex) -> complex:
    """Right-hand side of the generalized flow iαz(1+f1²) - 2i(αx+iαy) f1."""
    w = complex(alpha_vec.alpha_x, alpha_vec.alpha_y)
    return 1j * alpha_vec.alpha_z * (1.0 + f1 * f1) - 2j * w * f1


@dataclass
class RiccatiResult:
    """Sampled flow values; NaN past a movable pole when one was hit."""

    times: np.ndarray
    values: np.ndarray
    pole_encountered: bool
    pole_time: Optional[float] = None


POLE_LIMIT = 1e8


def riccati_evolve(
    alpha_vec: CouplingVector,
    f1_0: complex,
    times: Sequence[float],
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
) -> RiccatiResult:
    """Adaptive Dormand-Prince integration of the scalar complex flow.

    Same embedded 5(4) scheme and controller as the state integrator.  The
    flow has movable poles; |f1| crossing 1e8 terminates the trajectory
    with a pole flag and NaN tail.
    """
    t_arr = np.asarray(times, dtype=np.float64)
    if t_arr.size == 0:
        raise ValueError("times must not be empty")
    if np.any(np.diff(t_arr) <= 0) or t_arr[0] < 0:
        raise ValueError("times must be non-negative and strictly increasing")

    def rhs(fv: complex) -> complex:
        w = complex(alpha_vec.alpha_x, alpha_vec.alpha_y)
        return 1j * alpha_vec.alpha_z * (1.0 + fv * fv) - 2j * w * fv

    out = np.full(t_arr.shape, np.nan + 0j, dtype=np.complex128)
    f = complex(f1_0)
    t = 0.0
    pole = False
    pole_time = None

    # initial step from the local scale, as in the vector kernel
    k1 = rhs(f)
    sc0 = abs_tol + rel_tol * abs(f)
    d0, d1 = abs(f) / sc0, abs(k1) / sc0
    h = 1e-2 * d0 / d1 if (d0 > 1e-5 and d1 > 1e-5) else 1e-6

    for i, t_target in enumerate(t_arr):
        if pole:
            break
        if t_target == 0.0 and t == 0.0:
            out[i] = f
            continue
        while t < t_target:
            clipped = h >= (t_target - t)
            if clipped:
                h = t_target - t
            if h < 1e-13 * max(1.0, abs(t)):
                raise ArithmeticError(f"Riccati step underflow at t ≈ {t:.6g}")
            k2 = rhs(f + h * (tb.A21 * k1))
            k3 = rhs(f + h * (tb.A31 * k1 + tb.A32 * k2))
            k4 = rhs(f + h * (tb.A41 * k1 + tb.A42 * k2 + tb.A43 * k3))
            k5 = rhs(f + h * (tb.A51 * k1 + tb.A52 * k2 + tb.A53 * k3 + tb.A54 * k4))
            k6 = rhs(f + h * (tb.A61 * k1 + tb.A62 * k2 + tb.A63 * k3 + tb.A64 * k4 + tb.A65 * k5))
            f5 = f + h * (tb.B1 * k1 + tb.B3 * k3 + tb.B4 * k4 + tb.B5 * k5 + tb.B6 * k6)
            k7 = rhs(f5)
            ev = h * (tb.E1 * k1 + tb.E3 * k3 + tb.E4 * k4 + tb.E5 * k5 + tb.E6 * k6 + tb.E7 * k7)
            sc = abs_tol + rel_tol * max(abs(f), abs(f5))
            err = abs(ev) / sc
            if math.isnan(err) or math.isinf(err):
                h *= 0.1
                continue
            if err <= 1.0:
                t = t_target if clipped else t + h
                f = f5
                k1 = k7
                fac = tb.FAC_MAX if err == 0.0 else tb.SAFETY * err**tb.ORDER_EXPONENT
                h = h * min(tb.FAC_MAX, max(tb.FAC_MIN, fac))
                if abs(f) > POLE_LIMIT:
                    pole = True
                    pole_time = t
                    break
            else:
                h = h * min(1.0, max(tb.FAC_MIN, tb.SAFETY * err**tb.ORDER_EXPONENT))
        if not pole:
            out[i] = f
    return RiccatiResult(times=t_arr, values=out, pole_encountered=pole, pole_time=pole_time)


@dataclass(frozen=True)
class RiccatiFixedPoint:
    """Stationary flow value with its linearization eigenvalue."""

    value: complex
    linearization: complex  # d(rhs)/d(f1) at the root

    @property
    def stable(self) -> bool:
        return self.linearization.real < 0.0


def riccati_fixed_points(alpha_vec: CouplingVector) -> list:
    """Roots of αz f1² - 2(αx + iαy) f1 + αz = 0, with stability attached.

    For αz = 0 the flow is linear and the single root f1 = 0 is returned.
    A double root is reported once.
    """
    w = complex(alpha_vec.alpha_x, alpha_vec.alpha_y)
    az = alpha_vec.alpha_z

    def classify(root: complex) -> RiccatiFixedPoint:
        lam = 2j * az * root - 2j * w
        return RiccatiFixedPoint(value=root, linearization=lam)

    if az == 0.0:
        return [classify(0.0 + 0.0j)]
    disc = cmath.sqrt(w * w - az * az)
    r1 = (w + disc) / az
    r2 = (w - disc) / az
    if abs(r1 - r2) < 1e-14 * max(1.0, abs(r1)):
        return [classify(r1)]
    return [classify(r1), classify(r2)]


def attractor_direction(alpha_vec: CouplingVector) -> BlochVector:
    """Predicted late-time Bloch direction -α/|α| (unit vector)."""
    n = alpha_vec.norm()
    return BlochVector(
        x=-alpha_vec.alpha_x / n,
        y=-alpha_vec.alpha_y / n,
        z=-alpha_vec.alpha_z / n,
    )
