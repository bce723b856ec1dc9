import mpmath
import numpy as np
from hypothesis import given, strategies as st

from threewave.numerics import (bose_einstein, log1pexp, one_minus_exp_neg,
                                phi1, phi2)

mpmath.mp.dps = 40


def test_log1pexp_against_mpmath():
    for v in (-750.0, -40.0, -1.0, 0.0, 1.0, 35.0, 700.0):
        ref = float(mpmath.log(1 + mpmath.exp(v)))
        assert abs(log1pexp(v) - ref) <= 1e-15 * max(ref, 1e-300)


def test_one_minus_exp_neg_against_mpmath():
    for s in (1e-300, 1e-18, 1e-6, 0.5, 3.0, 50.0, 800.0):
        ref = float(-mpmath.expm1(-mpmath.mpf(s)))
        assert abs(one_minus_exp_neg(s) - ref) <= 1e-15 * max(ref, 1e-300)


def test_bose_einstein_values():
    assert abs(bose_einstein(1.0) - 1.0 / (np.e - 1.0)) < 1e-15
    assert abs(bose_einstein(1e-12) - 1e12) / 1e12 < 1e-3
    assert bose_einstein(700.0) < 1e-300


@given(st.floats(-30, 30))
def test_log1pexp_positive_and_monotone_shift(v):
    out = log1pexp(v)
    assert out > 0
    assert log1pexp(v + 1.0) > out


@given(st.floats(1e-300, 700, allow_nan=False))
def test_one_minus_exp_neg_in_unit_interval(s):
    out = one_minus_exp_neg(s)
    assert 0 < out <= 1


def test_phi_functions_small_z_limits():
    # phi1(0) = 1, phi2(0) = 1/2; both smooth through zero
    assert abs(phi1(0.0) - 1.0) < 1e-14
    assert abs(phi2(0.0) - 0.5) < 1e-14
    for z in (-5.0, -1e-7, 1e-10, 1e-6, 1e-2, 1.0, 30.0):
        ref1 = float(mpmath.expm1(z) / z)
        ref2 = float((mpmath.expm1(z) - z) / (mpmath.mpf(z) * z))
        assert abs(phi1(z) - ref1) <= 1e-12 * max(1.0, abs(ref1))
        assert abs(phi2(z) - ref2) <= 1e-12 * max(1.0, abs(ref2))
