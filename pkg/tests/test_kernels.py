"""Equivalence and determinism of the compiled and pure-Python steppers."""

import math

import numpy as np
import pytest

from ptrabi._kernels import HAVE_COMPILED, get_kernel, pyloop
from ptrabi.drive import SIGN_EXP_MINUS, SIGN_EXP_PLUS, DriveSpec, ModelParams, evaluate_drive
from ptrabi.hamiltonian import HamiltonianBuilder
from ptrabi.hilbert import CavityPrep, FockTruncation, prepare_state
from ptrabi.integrator import IntegratorConfig, evolve

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")


def _builder(variant="circular_pt", sign=SIGN_EXP_PLUS, eta=1.0, n_max=12):
    params = ModelParams(omega_0=5.0, omega_q=5.0, trunc=FockTruncation(n_max))
    drive = DriveSpec(variant=variant, g0=0.1, omega_g=10.0, eta=eta,
                      phi_x=0.3, phi_y=0.1, sign_convention=sign)
    return HamiltonianBuilder(params=params, drive=drive, form="full_rabi")


def test_internal_drive_matches_drive_module():
    cases = [
        (pyloop.DRIVE_CONSTANT, DriveSpec(variant="constant", g0=0.7)),
        (pyloop.DRIVE_CIRCULAR,
         DriveSpec(variant="circular_pt", g0=0.7, omega_g=3.1, sign_convention=SIGN_EXP_MINUS)),
        (pyloop.DRIVE_CIRCULAR,
         DriveSpec(variant="circular_pt", g0=0.7, omega_g=3.1, sign_convention=SIGN_EXP_PLUS)),
        (pyloop.DRIVE_ELLIPTICAL,
         DriveSpec(variant="elliptical", g0=0.7, omega_g=3.1, eta=1.8,
                   phi_x=0.2, phi_y=0.9, sign_convention=SIGN_EXP_MINUS)),
        (pyloop.DRIVE_ELLIPTICAL,
         DriveSpec(variant="elliptical", g0=0.7, omega_g=3.1, eta=1.8,
                   phi_x=0.2, phi_y=0.9, sign_convention=SIGN_EXP_PLUS)),
    ]
    for kind, spec in cases:
        sign = -1.0 if spec.sign_convention == SIGN_EXP_MINUS else 1.0
        for t in np.linspace(0.0, 7.0, 61):
            kernel_val = pyloop._gval(kind, t, spec.g0, spec.omega_g,
                                      spec.phi_x, spec.phi_y, spec.eta, sign)
            assert kernel_val == evaluate_drive(spec, float(t))  # bitwise


@needs_compiled
@pytest.mark.parametrize("variant,sign,eta", [
    ("constant", SIGN_EXP_PLUS, 1.0),
    ("circular_pt", SIGN_EXP_PLUS, 1.0),
    ("circular_pt", SIGN_EXP_MINUS, 1.0),
    ("elliptical", SIGN_EXP_PLUS, 1.6),
])
def test_kernels_agree_on_trajectories(variant, sign, eta):
    b = _builder(variant=variant, sign=sign, eta=eta)
    st = prepare_state(1.2, 0.7, CavityPrep(kind="coherent", mean_photons=1.0),
                       b.params.trunc)
    cfg = IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11,
                           sample_times=tuple(np.linspace(0.0, 30.0, 61)))
    rec_cy = evolve(st.copy(), b, cfg, kernel="cython")
    rec_py = evolve(st.copy(), b, cfg, kernel="python")
    assert np.max(np.abs(rec_cy.sz - rec_py.sz)) < 1e-6
    assert np.max(np.abs(rec_cy.photon_expectation - rec_py.photon_expectation)) < 1e-5
    assert np.max(np.abs(rec_cy.log_norm - rec_py.log_norm)) < 1e-6


@needs_compiled
def test_kernels_agree_against_oracle():
    from _oracles import propagate_exact

    rng = np.random.Generator(np.random.Philox(key=77))
    m = rng.normal(size=(10, 10)) + 1j * rng.normal(size=(10, 10))
    h = 0.5 * (m + m.conj().T)
    h /= np.linalg.norm(h, 2)
    psi0 = rng.normal(size=10) + 1j * rng.normal(size=10)
    psi0 /= np.linalg.norm(psi0)
    exact = propagate_exact(h, psi0, 10.0)
    for kernel in ("cython", "python"):
        y, log_norm, *_rest, status = get_kernel(kernel)(
            psi0.copy(), 0.0, 10.0,
            np.zeros(10, dtype=complex), h, None,
            pyloop.DRIVE_NONE, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
            1e-10, 1e-12, 0.0, math.inf, 10_000_000,
        )
        assert status == 0
        assert np.linalg.norm(y * math.exp(log_norm) - exact) < 1e-8


def test_kernel_repeat_is_bit_identical():
    b = _builder()
    st = prepare_state(0.9, 0.2, CavityPrep(kind="coherent", mean_photons=1.5),
                       b.params.trunc)
    cfg = IntegratorConfig(sample_times=tuple(np.linspace(0.0, 10.0, 21)))
    r1 = evolve(st.copy(), b, cfg)
    r2 = evolve(st.copy(), b, cfg)
    assert np.array_equal(r1.final_state.amplitudes, r2.final_state.amplitudes)
    assert r1.log_norm.tolist() == r2.log_norm.tolist()


def test_max_steps_status():
    h = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex) * 50.0
    y0 = np.array([1.0, 0.0], dtype=complex)
    y, log_norm, h_last, nacc, nrej, status = pyloop.propagate(
        y0, 0.0, 100.0,
        np.zeros(2, dtype=complex), h, None,
        pyloop.DRIVE_NONE, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
        1e-9, 1e-11, 0.0, math.inf, 50,
    )
    assert status == 2
