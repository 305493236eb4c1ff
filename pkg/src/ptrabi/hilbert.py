"""Truncated qubit ⊗ cavity Hilbert space: operators, states, expectations.

Basis ordering is fixed everywhere in this package: composite index
``i = 2n + s`` with ``s = 0`` the excited qubit state |e>, ``s = 1`` the
ground state |g>, and ``n`` the Fock level.  The composite dimension is
``2 (n_max + 1)``.  sigma_z has eigenvalue +1 on |e>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FockTruncation",
    "OperatorMatrix",
    "OperatorSet",
    "CompositeState",
    "BlochVector",
    "CavityPrep",
    "build_standard_operators",
    "build_casimir_ladder",
    "expectation",
    "prepare_state",
    "bloch_vector",
    "TruncationError",
    "ZeroNormError",
]


class TruncationError(ValueError):
    """Raised when a requested preparation does not fit the Fock cutoff."""


class ZeroNormError(ValueError):
    """Raised when a state's raw norm has collapsed to zero."""


@dataclass(frozen=True)
class FockTruncation:
    """Hard Fock-space cutoff: levels 0..n_max are retained, a†|n_max> = 0."""

    n_max: int

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    def index(self, n: int, qubit: str) -> int:
        """Composite index of |qubit, n> ('e' or 'g')."""
        if not 0 <= n <= self.n_max:
            raise ValueError(f"Fock level {n} outside 0..{self.n_max}")
        return 2 * n + {"e": 0, "g": 1}[qubit]


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix on the composite space."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries)


@dataclass(frozen=True)
class OperatorSet:
    """The standard operators on the composite space, all same dimension."""

    a: OperatorMatrix
    a_dagger: OperatorMatrix
    sigma_z: OperatorMatrix
    sigma_plus: OperatorMatrix
    sigma_minus: OperatorMatrix
    identity: OperatorMatrix

    @property
    def sigma_x(self) -> OperatorMatrix:
        return OperatorMatrix(self.sigma_plus.entries + self.sigma_minus.entries)

    @property
    def sigma_y(self) -> OperatorMatrix:
        return OperatorMatrix(-1j * self.sigma_plus.entries + 1j * self.sigma_minus.entries)

    @property
    def number(self) -> OperatorMatrix:
        return OperatorMatrix(self.a_dagger.entries @ self.a.entries)


@dataclass
class CompositeState:
    """Complex amplitude vector plus the log-norm factored out during evolution.

    Non-Hermitian evolution grows or shrinks the raw norm; the integrator
    periodically rescales the vector to unit norm and accumulates the factor
    in ``log_norm_accumulated``.  All expectations are norm-divided, so this
    bookkeeping never affects observables.
    """

    amplitudes: np.ndarray
    log_norm_accumulated: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if v.size % 2 != 0 or v.size < 4:
            raise ValueError(f"amplitude vector length {v.size} is not 2(n_max+1) with n_max >= 1")
        self.amplitudes = v

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def raw_norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def renormalize(self) -> None:
        """Rescale to unit raw norm, pushing the factor into the log account.

        A norm within 1e-12 of unity is treated as exactly 1 so that forced
        renormalization of an already-normalized state is a strict no-op.
        """
        r = self.raw_norm()
        if r == 0.0:
            raise ZeroNormError("state norm collapsed to zero")
        if abs(r - 1.0) < 1e-12:
            return
        self.amplitudes = self.amplitudes / r
        self.log_norm_accumulated += math.log(r)

    def copy(self) -> "CompositeState":
        return CompositeState(self.amplitudes.copy(), self.log_norm_accumulated)


@dataclass(frozen=True)
class BlochVector:
    """Reduced-qubit Bloch coordinates; non-unitary dynamics may enter the ball."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        r2 = self.x * self.x + self.y * self.y + self.z * self.z
        if r2 > 1.0 + 1e-9:
            raise ValueError(f"Bloch vector leaves the unit ball: |r|^2 = {r2}")

    def norm(self) -> float:
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


@dataclass(frozen=True)
class CavityPrep:
    """Cavity preparation: vacuum, a Fock level, or a truncated coherent state."""

    kind: str = "vacuum"  # vacuum | fock | coherent
    fock_level: int = 0
    mean_photons: float = 0.0

    def __post_init__(self):
        if self.kind not in ("vacuum", "fock", "coherent"):
            raise ValueError(f"unknown cavity preparation {self.kind!r}")
        if self.kind == "fock" and self.fock_level < 0:
            raise ValueError("Fock level must be non-negative")
        if self.kind == "coherent" and self.mean_photons < 0:
            raise ValueError("coherent mean photon number must be non-negative")


def build_standard_operators(trunc: FockTruncation) -> OperatorSet:
    """Ladder and Pauli operators tensored onto the composite space.

    a|n> = sqrt(n)|n-1>, a†|n> = sqrt(n+1)|n+1> for n < n_max and
    a†|n_max> = 0 (hard cutoff); sigma_z|e> = +|e>; sigma_plus|g> = |e>.
    Deterministic: identical truncations give bit-identical matrices.
    """
    d = trunc.dim
    a = np.zeros((d, d), dtype=np.complex128)
    for n in range(1, trunc.n_max + 1):
        rt = math.sqrt(n)
        for s in range(2):
            a[2 * (n - 1) + s, 2 * n + s] = rt
    sz = np.zeros((d, d), dtype=np.complex128)
    sp = np.zeros((d, d), dtype=np.complex128)
    for n in range(trunc.n_max + 1):
        sz[2 * n, 2 * n] = 1.0
        sz[2 * n + 1, 2 * n + 1] = -1.0
        sp[2 * n, 2 * n + 1] = 1.0
    return OperatorSet(
        a=OperatorMatrix(a),
        a_dagger=OperatorMatrix(a.conj().T),
        sigma_z=OperatorMatrix(sz),
        sigma_plus=OperatorMatrix(sp),
        sigma_minus=OperatorMatrix(sp.conj().T),
        identity=OperatorMatrix(np.eye(d, dtype=np.complex128)),
    )


def build_casimir_ladder(trunc: FockTruncation):
    """Conserved diagonal operator C = aa† + (1-sigma_z)/2 and ladders b, b†.

    C is built from its exact diagonal action C|e,n> = (n+1)|e,n>,
    C|g,n> = (n+2)|g,n> rather than from the truncated product a a†, whose
    top-row entry would vanish under the hard cutoff and break positivity.
    b = a sigma_minus C^{-1/2}; b† is its conjugate transpose.
    """
    d = trunc.dim
    c_diag = np.empty(d, dtype=np.float64)
    for n in range(trunc.n_max + 1):
        c_diag[2 * n] = n + 1.0  # |e,n>
        c_diag[2 * n + 1] = n + 2.0  # |g,n>
    if np.any(c_diag <= 0):
        raise AssertionError("Casimir diagonal must be strictly positive")
    ops = build_standard_operators(trunc)
    inv_sqrt_c = np.diag((1.0 / np.sqrt(c_diag)).astype(np.complex128))
    b = ops.a.entries @ ops.sigma_minus.entries @ inv_sqrt_c
    casimir = OperatorMatrix(np.diag(c_diag.astype(np.complex128)))
    return casimir, OperatorMatrix(b), OperatorMatrix(b.conj().T)


def expectation(op: OperatorMatrix, state: CompositeState) -> complex:
    """Norm-divided expectation <psi|op|psi> / <psi|psi>."""
    v = state.amplitudes
    if op.dim != v.size:
        raise ValueError(f"operator dim {op.dim} != state dim {v.size}")
    norm2 = float(np.vdot(v, v).real)
    if norm2 <= 0.0:
        raise ZeroNormError("cannot take expectation in a zero-norm state")
    return complex(np.vdot(v, op.entries @ v) / norm2)


def bloch_vector(ops: OperatorSet, state: CompositeState) -> BlochVector:
    """Reduced-qubit Bloch vector (⟨sigma_x⟩, ⟨sigma_y⟩, ⟨sigma_z⟩)."""
    return BlochVector(
        x=expectation(ops.sigma_x, state).real,
        y=expectation(ops.sigma_y, state).real,
        z=expectation(ops.sigma_z, state).real,
    )


def coherent_amplitudes(mean_photons: float, n_max: int) -> np.ndarray:
    """Truncated coherent-state Fock amplitudes (real phase convention).

    Raises TruncationError if more than 1e-6 of the untruncated norm falls
    beyond n_max, since the renormalized state would misrepresent the target.
    """
    alpha = math.sqrt(mean_photons)
    log_amps = np.empty(n_max + 1)
    for n in range(n_max + 1):
        log_amps[n] = n * math.log(alpha) - 0.5 * math.lgamma(n + 1) if alpha > 0 else (-math.inf if n else 0.0)
    amps = np.exp(log_amps - 0.5 * mean_photons)
    lost = 1.0 - float(np.dot(amps, amps))
    if lost > 1e-6:
        raise TruncationError(
            f"coherent state with mean {mean_photons} loses {lost:.3e} of its norm "
            f"at n_max={n_max}; raise n_max"
        )
    return amps / np.linalg.norm(amps)


def prepare_state(
    theta: float,
    phi: float,
    cavity: CavityPrep,
    trunc: FockTruncation,
) -> CompositeState:
    """Product state [cos(θ/2)|e> + e^{iφ} sin(θ/2)|g>] ⊗ |cavity>, unit norm."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    if cavity.kind == "vacuum":
        cav = np.zeros(trunc.n_max + 1)
        cav[0] = 1.0
    elif cavity.kind == "fock":
        if cavity.fock_level > trunc.n_max:
            raise TruncationError(
                f"Fock level {cavity.fock_level} exceeds n_max={trunc.n_max}"
            )
        cav = np.zeros(trunc.n_max + 1)
        cav[cavity.fock_level] = 1.0
    else:
        cav = coherent_amplitudes(cavity.mean_photons, trunc.n_max)

    qe = math.cos(theta / 2.0)
    qg = complex(math.cos(phi), math.sin(phi)) * math.sin(theta / 2.0)
    psi = np.empty(trunc.dim, dtype=np.complex128)
    psi[0::2] = qe * cav
    psi[1::2] = qg * cav
    psi /= np.linalg.norm(psi)
    return CompositeState(psi)
