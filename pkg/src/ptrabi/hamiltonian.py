"""Rabi, JC and anti-JC Hamiltonians with time-dependent complex coupling.

The time-stepping contract: every form decomposes as

    H(t) = diagonal + static_dense + g(t) * interaction

with the pieces precomputed once at assembly.  Integrators combine them per
evaluation and never rebuild matrices.  H(t) is Hermitian exactly when g(t)
is real (constant-drive full Rabi, JC, anti-JC); the circular and
elliptical drives make it non-Hermitian by design.

The qubit term defaults to (ω_q/2) σ_z, the choice consistent with the
sum-frequency resonance condition ω_g = ω0 + ωq used throughout.  The bare
ω_q σ_z variant is available via ``half_qubit_term=False``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .drive import DriveSpec, ModelParams, evaluate_drive
from .hilbert import OperatorMatrix, build_standard_operators

__all__ = [
    "HamiltonianBuilder",
    "AssembledHamiltonian",
    "CouplingVector",
    "build_hamiltonian",
    "effective_coupling_vector",
]

_FORMS = ("full_rabi", "jc", "anti_jc")


@dataclass(frozen=True)
class CouplingVector:
    """Effective coupling direction g0 (η cosΦ, η sinΦ, 1) of the reduced flow."""

    alpha_x: float
    alpha_y: float
    alpha_z: float

    def __post_init__(self):
        if self.alpha_x == 0.0 and self.alpha_y == 0.0 and self.alpha_z == 0.0:
            raise ValueError("coupling vector must be nonzero")

    def norm(self) -> float:
        return math.sqrt(self.alpha_x**2 + self.alpha_y**2 + self.alpha_z**2)

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha_x, self.alpha_y, self.alpha_z])


@dataclass(frozen=True)
class AssembledHamiltonian:
    """Precomputed decomposition H(t) = diag + static + g(t)·interaction.

    ``diagonal`` is the diagonal of the bare part (always present, may be
    zero); ``static_dense`` and ``interaction`` may be None.  ``drive`` is
    None when the Hamiltonian is time-independent.
    """

    diagonal: np.ndarray
    static_dense: Optional[np.ndarray]
    interaction: Optional[np.ndarray]
    drive: Optional[DriveSpec]

    @property
    def dim(self) -> int:
        return self.diagonal.size

    def coupling(self, t: float) -> complex:
        return evaluate_drive(self.drive, t) if self.drive is not None else 0.0

    def matrix(self, t: float) -> np.ndarray:
        h = np.diag(self.diagonal.astype(np.complex128))
        if self.static_dense is not None:
            h = h + self.static_dense
        if self.interaction is not None and self.drive is not None:
            h = h + evaluate_drive(self.drive, t) * self.interaction
        return h

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        """H(t) @ psi without materializing the combined matrix."""
        out = self.diagonal * psi
        if self.static_dense is not None:
            out = out + self.static_dense @ psi
        if self.interaction is not None and self.drive is not None:
            out = out + evaluate_drive(self.drive, t) * (self.interaction @ psi)
        return out

    @staticmethod
    def from_matrix(h: np.ndarray) -> "AssembledHamiltonian":
        """Wrap an explicit constant matrix (testing and custom models)."""
        h = np.asarray(h, dtype=np.complex128)
        return AssembledHamiltonian(
            diagonal=np.zeros(h.shape[0], dtype=np.complex128),
            static_dense=h,
            interaction=None,
            drive=None,
        )


@dataclass(frozen=True)
class HamiltonianBuilder:
    """Immutable recipe for one of the three model forms."""

    params: ModelParams
    drive: DriveSpec
    form: str = "full_rabi"
    half_qubit_term: bool = True

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ValueError(f"unknown Hamiltonian form {self.form!r}; expected one of {_FORMS}")

    def assemble(self) -> AssembledHamiltonian:
        ops = build_standard_operators(self.params.trunc)
        n_max = self.params.trunc.n_max
        qfac = 0.5 if self.half_qubit_term else 1.0
        w0, wq = self.params.omega_0, self.params.omega_q

        sz_diag = np.diag(ops.sigma_z.entries).real
        n_diag = np.repeat(np.arange(n_max + 1, dtype=np.float64), 2)

        if self.form == "full_rabi":
            diag = w0 * n_diag + qfac * wq * sz_diag
            inter = (ops.a_dagger.entries + ops.a.entries) @ (
                ops.sigma_plus.entries + ops.sigma_minus.entries
            )
            return AssembledHamiltonian(
                diagonal=diag.astype(np.complex128),
                static_dense=None,
                interaction=inter,
                drive=self.drive,
            )

        g0 = self.drive.g0
        if self.form == "jc":
            diag = w0 * n_diag + qfac * wq * sz_diag
            stat = g0 * (
                ops.a_dagger.entries @ ops.sigma_minus.entries
                + ops.a.entries @ ops.sigma_plus.entries
            )
        else:  # anti_jc; cavity term is a a† = N + 1, built from the exact
            # diagonal so the hard cutoff cannot zero the top entry
            diag = w0 * (n_diag + 1.0) + qfac * wq * sz_diag
            stat = g0 * (
                ops.a.entries @ ops.sigma_minus.entries
                + ops.a_dagger.entries @ ops.sigma_plus.entries
            )
        return AssembledHamiltonian(
            diagonal=diag.astype(np.complex128),
            static_dense=stat,
            interaction=None,
            drive=None,
        )


def build_hamiltonian(builder: HamiltonianBuilder, t: float) -> OperatorMatrix:
    """H(t) as an explicit matrix; reproducible bit-for-bit per (builder, t)."""
    return OperatorMatrix(builder.assemble().matrix(t))


def effective_coupling_vector(g0: float, eta: float, Phi: float) -> CouplingVector:
    """Direction of the reduced non-Hermitian flow for an elliptical drive."""
    if g0 <= 0:
        raise ValueError(f"g0 must be positive, got {g0}")
    return CouplingVector(
        alpha_x=g0 * eta * math.cos(Phi),
        alpha_y=g0 * eta * math.sin(Phi),
        alpha_z=g0,
    )
