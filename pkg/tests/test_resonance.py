import math
from fractions import Fraction

import pytest

from symevol.averaged import chi2_rhs, chi3_rhs
from symevol.model import ModelParams
from symevol.resonance import (classify_11, locate_12_first, locate_12_second,
                               locate_13, verify_stability_numerically)


def test_locate_12_first_energy_surface():
    m = locate_12_first(0.25)
    assert m.exists
    assert float(m.amplitude_ratio) == 8.0
    assert m.r2_sq == pytest.approx(1.0 / 24.0, abs=1e-15)
    assert m.r1_sq == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert m.angles == (0.0, math.pi)
    assert math.pi / 2 not in m.angles
    assert m.size_order == 0 and m.timescale_order == 1


def test_locate_12_first_empty_and_invalid():
    assert not locate_12_first(0.0).exists
    with pytest.raises(ValueError):
        locate_12_first(-1.0)


def test_locate_12_second_exact_ratio():
    m = locate_12_second(1, 1)
    assert m.exists
    assert m.amplitude_ratio == Fraction(91, 24)
    assert m.size_order == 1 and m.timescale_order == 3
    assert m.angle_stability == {0.0: "stable", math.pi: "unstable"}
    mf = locate_12_second(1.0, 1.0)
    assert abs(mf.amplitude_ratio - 91.0 / 24.0) < 1e-10


def test_locate_12_second_none_cases():
    assert not locate_12_second(0, 1).exists
    assert not locate_12_second(1, 0).exists
    degenerate = locate_12_second(0, 0)
    assert not degenerate.exists and degenerate.degenerate


def test_locate_12_second_ratio_is_a_root():
    p = ModelParams(1.0, 1.0, 0.0, 0.0, omega=2.0, epsilon=0.1, n=2)
    m = locate_12_second(1.0, 1.0)
    assert abs(chi2_rhs(math.sqrt(float(m.amplitude_ratio)), 1.0, p)) < 1e-10


def test_locate_12_second_none_means_fixed_sign():
    # when no manifold is reported the drift keeps one sign on the
    # positive quadrant (checked at extreme amplitude ratios)
    for a1, a2 in ((0, 1), (1, 0), (2, 1), (-1, 3)):
        m = locate_12_second(a1, a2)
        p = ModelParams(float(a1), float(a2), 0.0, 0.0, omega=2.0, epsilon=0.1, n=2)
        vals = [chi2_rhs(r1, r2, p) for r1, r2 in ((1e3, 1.0), (1.0, 1e3))]
        if m.exists:
            assert vals[0] * vals[1] < 0.0
        elif not m.degenerate:
            assert vals[0] * vals[1] > 0.0


def test_locate_13_ratio_and_root():
    m = locate_13(1, 1)
    assert m.exists
    assert m.amplitude_ratio == Fraction(1401, 976)
    assert m.size_order == 2 and m.timescale_order == 4
    p = ModelParams(1.0, 1.0, 0.0, 0.0, omega=3.0, epsilon=0.1, n=2)
    assert abs(chi3_rhs(math.sqrt(float(m.amplitude_ratio)), 1.0, p)) < 1e-10


def test_locate_13_none_cases():
    assert not locate_13(0, 1).exists
    deg = locate_13(0, 0)
    assert not deg.exists and deg.degenerate
    lit = locate_13(0, 0, literal_47_140=True)
    assert not lit.exists and not lit.degenerate


def test_classify_11_parameter_zero():
    modes = {r.mode: r for r in classify_11(0, 1)}
    assert modes["q1-normal-mode"].stable is False
    assert modes["q2-normal-mode"].stable is False
    assert modes["in-phase"].exists and modes["in-phase"].stable is True
    assert modes["out-of-phase"].exists and modes["out-of-phase"].stable is True


def test_classify_11_parameter_one():
    modes = {r.mode: r for r in classify_11(3, 1)}
    assert modes["q1-normal-mode"].stable is True
    assert modes["q2-normal-mode"].stable is True
    assert not modes["in-phase"].exists
    assert not modes["out-of-phase"].exists


def test_classify_11_boundary():
    # parameter exactly 2/15: a1/(3*a2) with a1 = 2, a2 = 5
    modes = {r.mode: r for r in classify_11(2, 5)}
    assert modes["q1-normal-mode"].stable == "boundary"
    assert modes["out-of-phase"].stable == "boundary"
    assert modes["q2-normal-mode"].stable is False  # 2/15 inside (-1/3, 1/3)


def test_classify_11_scale_invariance():
    for lam in (2, 5):
        a = classify_11(1, 4)
        b = classify_11(lam * 1, lam * 4)
        for ra, rb in zip(a, b):
            assert (ra.exists, ra.stable) == (rb.exists, rb.stable)


def test_classify_11_rejects_a2_zero():
    with pytest.raises(ValueError):
        classify_11(1, 0)


def test_verify_q1_mode_unstable_at_zero():
    report = [r for r in classify_11(0.0, 1.0) if r.mode == "q1-normal-mode"][0]
    assert verify_stability_numerically(report, E0=1.0, epsilon=0.1) == "consistent"


def test_verify_in_phase_stable_at_zero():
    report = [r for r in classify_11(0.0, 1.0) if r.mode == "in-phase"][0]
    assert verify_stability_numerically(report, E0=1.0, epsilon=0.1) == "consistent"


def test_verify_zero_perturbation_is_indeterminate():
    report = classify_11(0.0, 1.0)[0]
    assert verify_stability_numerically(report, E0=1.0, epsilon=0.1,
                                        perturbation=0.0) == "indeterminate"
