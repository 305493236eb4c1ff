"""Quantum Rabi model under complex PT-symmetric parametric driving.

Simulation (truncated composite Hilbert space, adaptive non-Hermitian
integration), closed-form analytics (hyperbolic flow coefficients,
instanton trajectory, Riccati fixed points), ensemble convergence harness,
and a config-driven CLI.
"""

from ._kernels import ACTIVE_KERNEL, HAVE_COMPILED
from .analytic import (
    InstantonAuxiliary,
    WeiNormanCoefficients,
    attractor_direction,
    auxiliary_flow,
    euclidean_action,
    instanton_sigma_z,
    riccati_evolve,
    riccati_fixed_points,
    wei_norman_evaluate,
    wei_norman_ode_residual,
)
from .drive import DriveSpec, ModelParams, evaluate_drive, orientation_angle, resonance_frequency
from .ensemble import EnsembleSpec, EnsembleSummary, fit_alpha, run_ensemble, sample_initial_conditions
from .hamiltonian import (
    AssembledHamiltonian,
    CouplingVector,
    HamiltonianBuilder,
    build_hamiltonian,
    effective_coupling_vector,
)
from .hilbert import (
    BlochVector,
    CavityPrep,
    CompositeState,
    FockTruncation,
    OperatorMatrix,
    OperatorSet,
    bloch_vector,
    build_casimir_ladder,
    build_standard_operators,
    expectation,
    prepare_state,
)
from .integrator import IntegrationError, IntegratorConfig, TrajectoryRecord, evolve

__version__ = "0.1.0"
