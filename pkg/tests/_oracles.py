"""Independent numerical oracles used by the test suite.

The matrix exponential here is a self-contained scaling-and-squaring Padé
implementation, deliberately separate from the production integrator so the
two sides of every propagation check stay independent.
"""

import numpy as np

# [6/6] Padé coefficients of exp(x)
_PADE6 = (
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
)


def expm_ss(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a [6/6] Padé core."""
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    norm = np.linalg.norm(a, np.inf)
    s = max(0, int(np.ceil(np.log2(norm / 0.5))) if norm > 0.5 else 0)
    x = a / (2.0**s)

    powers = [np.eye(n, dtype=np.complex128)]
    for _ in range(6):
        powers.append(powers[-1] @ x)
    num = sum(c * p for c, p in zip(_PADE6, powers))
    den = sum(c * ((-1.0) ** k) * p for k, (c, p) in enumerate(zip(_PADE6, powers)))
    e = np.linalg.solve(den, num)
    for _ in range(s):
        e = e @ e
    return e


def propagate_exact(h: np.ndarray, psi0: np.ndarray, t: float) -> np.ndarray:
    """Reference solution exp(-i H t) psi0 for constant H."""
    return expm_ss(-1j * t * np.asarray(h, dtype=np.complex128)) @ np.asarray(psi0, dtype=np.complex128)


def two_level_sigma_z(g: float, t: np.ndarray) -> np.ndarray:
    """Closed-form resonant vacuum Rabi oscillation of <sigma_z>."""
    return np.cos(2.0 * g * np.asarray(t))
