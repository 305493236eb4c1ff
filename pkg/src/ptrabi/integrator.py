"""Adaptive non-Hermitian Schrödinger integration with norm bookkeeping.

``evolve`` integrates d psi/dt = -i H(t) psi with an embedded Dormand-Prince
5(4) stepper (compiled kernel when available, numpy fallback otherwise).
Steps are clipped to land exactly on the requested sample times, so sampled
states are step endpoints, never interpolants.

Norm policy: the state is kept at unit raw norm throughout (rescaled after
every accepted step, with the factor accumulated in the log-norm account),
which keeps the raw norm trivially inside the configured guard band and
makes an externally forced renormalization an exact no-op.  Expectations
are norm-divided everywhere, so none of this bookkeeping is observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from ._kernels import pyloop, tableau
from .drive import SIGN_EXP_MINUS, DriveSpec, ModelParams
from .hamiltonian import AssembledHamiltonian, HamiltonianBuilder
from .hilbert import (
    BlochVector,
    CompositeState,
    FockTruncation,
    OperatorSet,
    build_standard_operators,
)

__all__ = ["IntegratorConfig", "TrajectoryRecord", "IntegrationError", "evolve"]

LEAKAGE_LIMIT = 1e-6


class IntegrationError(RuntimeError):
    """Step-size underflow or other unrecoverable integration failure."""


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances, step limits and sample grid for one evolve() call.

    ``abs_tol`` applies to the unit-normalized state vector, i.e. it is an
    absolute floor per unit of state norm; this makes step-size control
    invariant under rescaling of the (linear) flow.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = math.inf
    initial_step: float = 0.0
    renormalize_threshold: float = 1e3
    sample_times: tuple = ()
    max_steps_per_interval: int = 5_000_000

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.renormalize_threshold <= 1.0:
            raise ValueError("renormalize_threshold must exceed 1")
        ts = tuple(float(t) for t in self.sample_times)
        if ts:
            if ts[0] < 0.0:
                raise ValueError("sample times must start at or after t = 0")
            if any(b <= a for a, b in zip(ts, ts[1:])):
                raise ValueError("sample times must be strictly increasing")
        object.__setattr__(self, "sample_times", ts)


@dataclass
class TrajectoryRecord:
    """Sampled observables of one trajectory plus provenance metadata."""

    times: np.ndarray
    bloch: list
    photon_expectation: np.ndarray
    log_norm: np.ndarray
    leakage: np.ndarray
    drive_meta: Optional[DriveSpec]
    params_meta: Optional[ModelParams]
    trusted: bool
    final_state: Optional[CompositeState] = None
    n_accepted: int = 0
    n_rejected: int = 0

    @property
    def sz(self) -> np.ndarray:
        return np.array([b.z for b in self.bloch])

    @property
    def sx(self) -> np.ndarray:
        return np.array([b.x for b in self.bloch])

    @property
    def sy(self) -> np.ndarray:
        return np.array([b.y for b in self.bloch])


_DRIVE_CODES = {
    "constant": pyloop.DRIVE_CONSTANT,
    "circular_pt": pyloop.DRIVE_CIRCULAR,
    "elliptical": pyloop.DRIVE_ELLIPTICAL,
}


def _drive_args(drive: Optional[DriveSpec]):
    if drive is None:
        return (pyloop.DRIVE_NONE, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    sign = -1.0 if drive.sign_convention == SIGN_EXP_MINUS else 1.0
    return (
        _DRIVE_CODES[drive.variant],
        drive.g0,
        drive.omega_g,
        drive.phi_x,
        drive.phi_y,
        drive.eta,
        sign,
    )


def _qubit_observables(dim: int) -> OperatorSet:
    if dim < 4 or dim % 2 != 0:
        raise ValueError(
            f"state dimension {dim} does not fit the qubit ⊗ Fock layout 2(n_max+1)"
        )
    return build_standard_operators(FockTruncation(dim // 2 - 1))


def evolve(
    state0: CompositeState,
    hamiltonian: Union[HamiltonianBuilder, AssembledHamiltonian],
    config: IntegratorConfig,
    kernel: Optional[str] = None,
    forced_renorm_times: Sequence[float] = (),
) -> TrajectoryRecord:
    """Integrate from t = 0 through config.sample_times, recording observables.

    ``forced_renorm_times``: sample times at which an extra renormalization
    is injected (bookkeeping no-op by construction; exists so the rescaling
    invariance is directly testable).
    """
    if not config.sample_times:
        raise ValueError("config.sample_times must not be empty")
    drive_meta = params_meta = None
    if isinstance(hamiltonian, HamiltonianBuilder):
        drive_meta = hamiltonian.drive
        params_meta = hamiltonian.params
        assembled = hamiltonian.assemble()
    else:
        assembled = hamiltonian
    if assembled.dim != state0.dim:
        raise ValueError(f"dimension mismatch: H is {assembled.dim}, state is {state0.dim}")

    state = state0.copy()
    r0 = state.raw_norm()
    if abs(r0 - 1.0) > 1e-8:
        raise ValueError(f"initial state must have unit raw norm, got {r0}")
    state.renormalize()

    ops = _qubit_observables(state.dim)
    number_op = ops.number.entries
    sx_op, sy_op, sz_op = ops.sigma_x.entries, ops.sigma_y.entries, ops.sigma_z.entries

    propagate = _kernels.get_kernel(kernel)
    dargs = _drive_args(assembled.drive)
    forced = set(float(t) for t in forced_renorm_times)

    times = np.array(config.sample_times)
    bloch: list = []
    photons = np.empty(times.size)
    log_norms = np.empty(times.size)
    leaks = np.empty(times.size)

    y = state.amplitudes
    log_norm = state.log_norm_accumulated
    t_prev = 0.0
    h_carry = config.initial_step
    n_acc_tot = 0
    n_rej_tot = 0

    def record(i, y, log_norm):
        norm2 = float(np.vdot(y, y).real)
        bloch.append(
            BlochVector(
                x=float(np.vdot(y, sx_op @ y).real / norm2),
                y=float(np.vdot(y, sy_op @ y).real / norm2),
                z=float(np.vdot(y, sz_op @ y).real / norm2),
            )
        )
        photons[i] = float(np.vdot(y, number_op @ y).real / norm2)
        log_norms[i] = log_norm
        leaks[i] = float(np.sum(np.abs(y[-4:]) ** 2) / norm2)

    for i, t_target in enumerate(times):
        if t_target > t_prev:
            y, dlog, h_carry, n_acc, n_rej, status = propagate(
                y,
                t_prev,
                float(t_target),
                assembled.diagonal,
                assembled.static_dense,
                assembled.interaction,
                *dargs,
                config.rel_tol,
                config.abs_tol,
                h_carry,
                config.max_step,
                config.max_steps_per_interval,
            )
            log_norm += dlog
            n_acc_tot += n_acc
            n_rej_tot += n_rej
            if status == tableau.STATUS_STEP_UNDERFLOW:
                raise IntegrationError(
                    f"step size underflow at t ≈ {t_prev:.6g} (stiff or singular problem); "
                    f"accepted {n_acc_tot} steps, rejected {n_rej_tot}"
                )
            if status == tableau.STATUS_MAX_STEPS:
                raise IntegrationError(
                    f"exceeded {config.max_steps_per_interval} steps in one sample interval"
                )
            if status == tableau.STATUS_ZERO_NORM:
                raise IntegrationError(f"state norm collapsed to zero at t ≈ {t_prev:.6g}")
            t_prev = float(t_target)
        if float(t_target) in forced:
            st = CompositeState(y.copy(), log_norm)
            st.renormalize()
            y, log_norm = st.amplitudes, st.log_norm_accumulated
        record(i, y, log_norm)

    final = CompositeState(y.copy(), log_norm)
    trusted = bool(np.all(leaks < LEAKAGE_LIMIT))
    return TrajectoryRecord(
        times=times,
        bloch=bloch,
        photon_expectation=photons,
        log_norm=log_norms,
        leakage=leaks,
        drive_meta=drive_meta,
        params_meta=params_meta,
        trusted=trusted,
        final_state=final,
        n_accepted=n_acc_tot,
        n_rejected=n_rej_tot,
    )
