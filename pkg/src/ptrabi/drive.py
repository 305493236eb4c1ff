"""Time-dependent complex coupling g(t) and model frequency bookkeeping.

Three drive families:

* ``constant``   — g(t) = g0 (real; the undriven Rabi/JC coupling).
* ``circular_pt``— g(t) = g0 exp(∓i ω_g t) per the sign convention.  The
  modulus is constant; real part even and imaginary part odd in t.
* ``elliptical`` — g(t) = g0 [cos(ω_g t + φx) + i η sin(ω_g t + φy)],
  conjugated as a whole when the active sign convention is ``exp_minus`` so
  that η = 1, φx = φy = 0 reduces to the active circular form.

Both circular sign conventions appear in the literature for the same
physical scheme; the simulator exposes both and the ensemble layer records
which one produces the ground-state attractor (``exp_plus`` does, under the
sigma_z|e> = +|e> convention used here).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .hilbert import FockTruncation

__all__ = [
    "DriveSpec",
    "ModelParams",
    "evaluate_drive",
    "resonance_frequency",
    "orientation_angle",
    "SIGN_EXP_MINUS",
    "SIGN_EXP_PLUS",
]

SIGN_EXP_MINUS = "exp_minus"
SIGN_EXP_PLUS = "exp_plus"

_VARIANTS = ("constant", "circular_pt", "elliptical")


@dataclass(frozen=True)
class DriveSpec:
    """Parametrization of the complex coupling g(t)."""

    variant: str = "circular_pt"
    g0: float = 0.05
    omega_g: float = 0.0
    phi_x: float = 0.0
    phi_y: float = 0.0
    eta: float = 1.0
    sign_convention: str = SIGN_EXP_MINUS

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown drive variant {self.variant!r}; expected one of {_VARIANTS}")
        if self.g0 <= 0:
            raise ValueError(f"g0 must be positive, got {self.g0}")
        if self.eta < 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")
        if self.sign_convention not in (SIGN_EXP_MINUS, SIGN_EXP_PLUS):
            raise ValueError(f"unknown sign convention {self.sign_convention!r}")


@dataclass(frozen=True)
class ModelParams:
    """Bare frequencies and the Fock truncation they act on (ħ = 1)."""

    omega_0: float
    omega_q: float
    trunc: FockTruncation

    def __post_init__(self):
        if self.omega_0 <= 0 or self.omega_q <= 0:
            raise ValueError(
                f"frequencies must be positive, got omega_0={self.omega_0}, omega_q={self.omega_q}"
            )


def evaluate_drive(spec: DriveSpec, t: float) -> complex:
    """g(t) for the given drive family; pure and deterministic."""
    if spec.variant == "constant":
        return complex(spec.g0)
    sign = -1.0 if spec.sign_convention == SIGN_EXP_MINUS else 1.0
    if spec.variant == "circular_pt":
        ph = sign * spec.omega_g * t
        return spec.g0 * complex(math.cos(ph), math.sin(ph))
    # elliptical, as written for exp_plus; conjugate overall under exp_minus
    val = spec.g0 * complex(
        math.cos(spec.omega_g * t + spec.phi_x),
        spec.eta * math.sin(spec.omega_g * t + spec.phi_y),
    )
    return val.conjugate() if sign < 0 else val


def resonance_frequency(params: ModelParams, target: str) -> float:
    """Drive frequency that makes the chosen interaction block stationary.

    ``anti_jc`` — sum-frequency parametric resonance ω0 + ωq (brings the
    counter-rotating pair-creation/annihilation terms to rest);
    ``jc`` — difference frequency ω0 − ωq for the co-rotating terms.
    """
    if target == "anti_jc":
        return params.omega_0 + params.omega_q
    if target == "jc":
        return params.omega_0 - params.omega_q
    raise ValueError(f"unknown resonance target {target!r}; expected 'jc' or 'anti_jc'")


def orientation_angle(phi_x: float, phi_y: float) -> float:
    """Ellipse orientation Φ = (φx − φy)/2."""
    return 0.5 * (phi_x - phi_y)
