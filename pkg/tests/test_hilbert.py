import math

import numpy as np
import pytest

from ptrabi.hilbert import (
    BlochVector,
    CavityPrep,
    CompositeState,
    FockTruncation,
    TruncationError,
    ZeroNormError,
    bloch_vector,
    build_casimir_ladder,
    build_standard_operators,
    coherent_amplitudes,
    expectation,
    prepare_state,
)


def test_truncation_validation():
    with pytest.raises(ValueError):
        FockTruncation(0)
    t = FockTruncation(5)
    assert t.dim == 12
    assert t.index(0, "e") == 0
    assert t.index(0, "g") == 1
    assert t.index(3, "e") == 6


def test_ladder_matrix_elements_nmax2():
    ops = build_standard_operators(FockTruncation(2))
    a = ops.a.entries
    # Fock superdiagonal sqrt(1), sqrt(2) on both qubit branches
    for s in range(2):
        assert a[0 + s, 2 + s] == pytest.approx(1.0)
        assert a[2 + s, 4 + s] == pytest.approx(math.sqrt(2.0))
    assert np.count_nonzero(a) == 4
    # hard cutoff: a† annihilates the top level
    ad = ops.a_dagger.entries
    top = np.zeros(6, dtype=complex)
    top[4] = 1.0
    assert np.linalg.norm(ad @ top) == 0.0


def test_canonical_commutator_on_interior():
    trunc = FockTruncation(6)
    ops = build_standard_operators(trunc)
    a, ad = ops.a.entries, ops.a_dagger.entries
    comm = a @ ad - ad @ a
    interior = slice(0, 2 * trunc.n_max)  # Fock levels 0..n_max-1
    assert np.allclose(comm[interior, interior], np.eye(2 * trunc.n_max), atol=1e-14)


def test_pauli_algebra():
    ops = build_standard_operators(FockTruncation(3))
    sp, sm = ops.sigma_plus.entries, ops.sigma_minus.entries
    assert np.allclose(sp @ sm + sm @ sp, np.eye(8), atol=1e-15)
    sz = ops.sigma_z.entries
    assert np.allclose(sp @ sm - sm @ sp, sz, atol=1e-15)


def test_sigma_conventions():
    trunc = FockTruncation(2)
    ops = build_standard_operators(trunc)
    e0 = np.zeros(6, dtype=complex)
    e0[trunc.index(0, "e")] = 1.0
    g0 = np.zeros(6, dtype=complex)
    g0[trunc.index(0, "g")] = 1.0
    assert np.allclose(ops.sigma_z.entries @ e0, e0)
    assert np.allclose(ops.sigma_z.entries @ g0, -g0)
    assert np.allclose(ops.sigma_plus.entries @ g0, e0)


def test_build_is_deterministic():
    a1 = build_standard_operators(FockTruncation(8))
    a2 = build_standard_operators(FockTruncation(8))
    assert np.array_equal(a1.a.entries, a2.a.entries)
    assert np.array_equal(a1.sigma_z.entries, a2.sigma_z.entries)


def test_casimir_diagonal_action():
    trunc = FockTruncation(7)
    casimir, b, b_dag = build_casimir_ladder(trunc)
    diag = np.diag(casimir.entries).real
    for n in range(trunc.n_max + 1):
        assert diag[trunc.index(n, "e")] == pytest.approx(n + 1.0)
        assert diag[trunc.index(n, "g")] == pytest.approx(n + 2.0)
    assert diag.min() == pytest.approx(1.0)
    assert np.array_equal(b_dag.entries, b.entries.conj().T)


def test_commutator_identities_interior_projected():
    trunc = FockTruncation(12)
    ops = build_standard_operators(trunc)
    casimir, b, b_dag = build_casimir_ladder(trunc)
    sz, bm, bd, c = ops.sigma_z.entries, b.entries, b_dag.entries, casimir.entries
    proj = np.eye(trunc.dim)
    proj[-4:, -4:] = 0.0  # drop top two Fock levels

    def fro(m):
        return np.linalg.norm(proj @ m @ proj)

    assert fro(sz @ bm - bm @ sz + 2.0 * bm) < 1e-12
    assert fro(sz @ bd - bd @ sz - 2.0 * bd) < 1e-12
    c_inv = np.diag(1.0 / np.diag(c))
    assert fro(bm @ bd - bd @ bm - (c_inv - np.eye(trunc.dim)) @ sz) < 1e-10


def test_expectation_basics():
    trunc = FockTruncation(3)
    ops = build_standard_operators(trunc)
    e0 = prepare_state(0.0, 0.0, CavityPrep(kind="vacuum"), trunc)
    assert expectation(ops.identity, e0) == pytest.approx(1.0)
    assert expectation(ops.sigma_z, e0).real == pytest.approx(1.0)
    plus = prepare_state(math.pi / 2, 0.0, CavityPrep(kind="vacuum"), trunc)
    assert abs(expectation(ops.sigma_z, plus)) < 1e-15
    # expectations are norm-divided: scaling the raw vector changes nothing
    scaled = CompositeState(2.5 * e0.amplitudes)
    assert expectation(ops.sigma_z, scaled).real == pytest.approx(1.0)


def test_expectation_zero_norm_errors():
    trunc = FockTruncation(2)
    ops = build_standard_operators(trunc)
    dead = CompositeState(np.zeros(trunc.dim, dtype=complex))
    with pytest.raises(ZeroNormError):
        expectation(ops.sigma_z, dead)


def test_prepare_poles():
    trunc = FockTruncation(4)
    north = prepare_state(0.0, 1.3, CavityPrep(kind="vacuum"), trunc)
    assert abs(north.amplitudes[trunc.index(0, "e")]) == pytest.approx(1.0)
    south = prepare_state(math.pi, 0.7, CavityPrep(kind="vacuum"), trunc)
    assert abs(south.amplitudes[trunc.index(0, "g")]) == pytest.approx(1.0)


def test_prepare_coherent_mean_photons():
    trunc = FockTruncation(30)
    ops = build_standard_operators(trunc)
    st = prepare_state(math.pi / 2, 0.0, CavityPrep(kind="coherent", mean_photons=4.0), trunc)
    assert st.raw_norm() == pytest.approx(1.0, abs=1e-12)
    n = expectation(ops.number, st).real
    assert n == pytest.approx(4.0, abs=1e-6)


def test_prepare_coherent_truncation_rejected():
    with pytest.raises(TruncationError):
        coherent_amplitudes(20.0, 10)
    with pytest.raises(TruncationError):
        prepare_state(0.3, 0.0, CavityPrep(kind="coherent", mean_photons=20.0), FockTruncation(10))


def test_prepare_fock():
    trunc = FockTruncation(6)
    st = prepare_state(0.0, 0.0, CavityPrep(kind="fock", fock_level=3), trunc)
    assert abs(st.amplitudes[trunc.index(3, "e")]) == pytest.approx(1.0)
    with pytest.raises(TruncationError):
        prepare_state(0.0, 0.0, CavityPrep(kind="fock", fock_level=7), trunc)


def test_sigma_z_equals_cos_theta_grid():
    trunc = FockTruncation(2)
    ops = build_standard_operators(trunc)
    thetas = np.linspace(0.0, math.pi, 10)
    phis = np.linspace(0.0, 2 * math.pi, 10, endpoint=False)
    for th in thetas:
        for ph in phis:
            st = prepare_state(th, ph, CavityPrep(kind="vacuum"), trunc)
            assert expectation(ops.sigma_z, st).real == pytest.approx(math.cos(th), abs=1e-12)


def test_bloch_vector_of_prepared_state():
    trunc = FockTruncation(2)
    ops = build_standard_operators(trunc)
    th, ph = 1.1, 2.3
    bv = bloch_vector(ops, prepare_state(th, ph, CavityPrep(kind="vacuum"), trunc))
    assert bv.x == pytest.approx(math.sin(th) * math.cos(ph), abs=1e-12)
    assert bv.y == pytest.approx(math.sin(th) * math.sin(ph), abs=1e-12)
    assert bv.z == pytest.approx(math.cos(th), abs=1e-12)
    assert bv.norm() == pytest.approx(1.0, abs=1e-12)


def test_bloch_ball_invariant():
    BlochVector(x=0.3, y=0.4, z=0.5)  # interior is fine
    with pytest.raises(ValueError):
        BlochVector(x=1.0, y=1.0, z=1.0)


def test_renormalize_bookkeeping():
    v = np.zeros(6, dtype=complex)
    v[0] = 3.0
    st = CompositeState(v)
    st.renormalize()
    assert st.raw_norm() == pytest.approx(1.0)
    assert st.log_norm_accumulated == pytest.approx(math.log(3.0))
    # renormalizing an already unit state is a strict no-op
    amps_before = st.amplitudes.copy()
    st.renormalize()
    assert np.array_equal(st.amplitudes, amps_before)
    assert st.log_norm_accumulated == pytest.approx(math.log(3.0))
