import cmath
import math

import numpy as np
import pytest

from ptrabi.drive import (
    SIGN_EXP_MINUS,
    SIGN_EXP_PLUS,
    DriveSpec,
    ModelParams,
    evaluate_drive,
    orientation_angle,
    resonance_frequency,
)
from ptrabi.hilbert import FockTruncation


def circ(g0=1.0, wg=2.0, sign=SIGN_EXP_MINUS):
    return DriveSpec(variant="circular_pt", g0=g0, omega_g=wg, sign_convention=sign)


def test_constant_ignores_time():
    spec = DriveSpec(variant="constant", g0=0.7, omega_g=123.0)
    assert evaluate_drive(spec, 0.0) == 0.7
    assert evaluate_drive(spec, 17.3) == 0.7


def test_circular_phase_zero():
    assert evaluate_drive(circ(), 0.0) == pytest.approx(1.0 + 0.0j)


def test_circular_quarter_period_exp_minus():
    wg = 3.7
    t = math.pi / (2.0 * wg)
    val = evaluate_drive(circ(wg=wg), t)
    assert val == pytest.approx(-1.0j, abs=1e-15)


def test_circular_quarter_period_exp_plus():
    wg = 3.7
    t = math.pi / (2.0 * wg)
    val = evaluate_drive(circ(wg=wg, sign=SIGN_EXP_PLUS), t)
    assert val == pytest.approx(1.0j, abs=1e-15)


def test_elliptical_reduces_to_circular():
    # eta=1, phases zero, exp_plus: cos + i sin = e^{+i w t}
    spec = DriveSpec(variant="elliptical", g0=1.0, omega_g=2.0, eta=1.0,
                     sign_convention=SIGN_EXP_PLUS)
    for t in np.linspace(0.0, 5.0, 41):
        assert evaluate_drive(spec, t) == pytest.approx(cmath.exp(2.0j * t), abs=1e-14)
    # the exp_minus convention conjugates the whole expression
    spec_m = DriveSpec(variant="elliptical", g0=1.0, omega_g=2.0, eta=1.0,
                       sign_convention=SIGN_EXP_MINUS)
    for t in np.linspace(0.0, 5.0, 41):
        assert evaluate_drive(spec_m, t) == pytest.approx(cmath.exp(-2.0j * t), abs=1e-14)


def test_circular_modulus_constant():
    spec = circ(g0=0.31, wg=5.0)
    for t in np.linspace(0.0, 20.0, 301):
        assert abs(evaluate_drive(spec, t)) == pytest.approx(0.31, abs=1e-15)


def test_elliptical_modulus_bounds():
    g0, eta = 0.8, 2.5
    spec = DriveSpec(variant="elliptical", g0=g0, omega_g=1.0, eta=eta,
                     sign_convention=SIGN_EXP_PLUS)
    period = 2.0 * math.pi
    mods = np.array([abs(evaluate_drive(spec, t)) for t in np.linspace(0, period, 2001)])
    assert mods.min() == pytest.approx(g0 * 1.0, abs=1e-4)
    assert mods.max() == pytest.approx(g0 * eta, abs=1e-4)
    assert mods.min() >= g0 * 1.0 - 1e-12
    assert mods.max() <= g0 * eta + 1e-12


def test_elliptical_unit_eta_constant_modulus():
    spec = DriveSpec(variant="elliptical", g0=0.5, omega_g=3.0, eta=1.0,
                     sign_convention=SIGN_EXP_PLUS)
    for t in np.linspace(0.0, 10.0, 101):
        assert abs(evaluate_drive(spec, t)) == pytest.approx(0.5, abs=1e-14)


def test_evaluate_is_pure():
    spec = circ(g0=0.2, wg=1.5)
    assert evaluate_drive(spec, 1.234) == evaluate_drive(spec, 1.234)


def test_resonance_frequencies():
    params = ModelParams(omega_0=5.0, omega_q=5.0, trunc=FockTruncation(4))
    assert resonance_frequency(params, "anti_jc") == pytest.approx(10.0)
    assert resonance_frequency(params, "jc") == pytest.approx(0.0)
    params2 = ModelParams(omega_0=6.0, omega_q=4.0, trunc=FockTruncation(4))
    assert resonance_frequency(params2, "jc") == pytest.approx(2.0)
    with pytest.raises(ValueError):
        resonance_frequency(params, "nope")


def test_orientation_angle():
    assert orientation_angle(0.6, 0.2) == pytest.approx(0.2)


def test_spec_validation():
    with pytest.raises(ValueError):
        DriveSpec(variant="circular_pt", g0=0.0)
    with pytest.raises(ValueError):
        DriveSpec(variant="elliptical", g0=1.0, eta=-0.5)
    with pytest.raises(ValueError):
        DriveSpec(variant="wiggly", g0=1.0)
    with pytest.raises(ValueError):
        DriveSpec(variant="circular_pt", g0=1.0, sign_convention="exp_both")
    with pytest.raises(ValueError):
        ModelParams(omega_0=-1.0, omega_q=1.0, trunc=FockTruncation(2))
