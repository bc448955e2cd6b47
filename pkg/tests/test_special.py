import math

import mpmath
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from detkernel.errors import PoleError
from detkernel.special import (
    Germ,
    SignedLogValue,
    gamma_germ,
    is_gamma_pole,
    log_gamma_signed,
    pochhammer,
    reciprocal_gamma,
    reciprocal_gamma_germ,
    signed_log_product,
)

reals = st.floats(-40.0, 40.0, allow_nan=False, allow_infinity=False)


def off_pole(x):
    return abs(x - round(x)) > 1e-6 or x > 0.5


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.5, 10.3, 150.7, -0.5, -1.5, -2.25, -10.7, -30.1])
def test_log_gamma_against_mpmath(x):
    ref = mpmath.gamma(mpmath.mpf(x))
    got = log_gamma_signed(x)
    assert got.sign == (1 if ref > 0 else -1)
    assert got.log_magnitude == pytest.approx(float(mpmath.log(abs(ref))), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("x", [0.3, 1.0, 7.5, 171.5, 200.0, -0.5, -3.7, -25.2, -168.4])
def test_reciprocal_gamma_against_mpmath(x):
    assert reciprocal_gamma(x) == pytest.approx(float(mpmath.rgamma(x)), rel=1e-12)


@pytest.mark.parametrize("k", range(0, 8))
def test_reciprocal_gamma_vanishes_at_poles(k):
    assert reciprocal_gamma(-k) == 0.0
    assert is_gamma_pole(-k)
    with pytest.raises(PoleError) as exc:
        log_gamma_signed(-k)
    assert exc.value.integer == -k


def test_positive_integers_are_not_poles():
    assert not is_gamma_pole(1.0)
    assert not is_gamma_pole(-0.5)


@settings(max_examples=200, deadline=None)
@given(reals)
def test_recurrence(x):
    assume(off_pole(x) and off_pole(x + 1) and abs(x) > 1e-6)
    lhs = log_gamma_signed(x + 1)
    rhs = log_gamma_signed(x) * SignedLogValue.from_value(x)
    assert lhs.sign == rhs.sign
    assert lhs.log_magnitude == pytest.approx(rhs.log_magnitude, abs=1e-10 * max(1.0, abs(rhs.log_magnitude)))


@settings(max_examples=200, deadline=None)
@given(st.floats(-20.0, 20.0))
def test_reflection(x):
    assume(abs(x - round(x)) > 1e-4)
    prod = log_gamma_signed(x) * log_gamma_signed(1 - x)
    expected = math.pi / math.sin(math.pi * x)
    assert prod.value == pytest.approx(expected, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(st.floats(-15.0, 15.0), st.integers(-80, 80))
def test_pochhammer_inverse(a, k):
    assume(min(abs(a + j - round(a + j)) for j in range(-abs(k) - 1, abs(k) + 1)) > 1e-3)
    assert pochhammer(a, k) * pochhammer(a + k, -k) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("a,k", [(0.5, 3), (2.0, 70), (-3.5, 4), (1.25, -5), (10.5, -65)])
def test_pochhammer_against_mpmath(a, k):
    assert pochhammer(a, k) == pytest.approx(float(mpmath.rf(a, k)), rel=1e-12)


def test_reciprocal_gamma_overflow_is_signed_infinity():
    assert reciprocal_gamma(-180.4) == math.copysign(math.inf, float(mpmath.rgamma(-180.4)))


def test_pochhammer_zero_factor():
    assert pochhammer(-2.0, 3) == 0.0
    with pytest.raises(PoleError):
        pochhammer(2.0, -3)


def test_signed_log_product_handles_overflow():
    big = [log_gamma_signed(170.5)] * 10
    out = signed_log_product(big)
    assert out.sign == 1 and math.isfinite(out.log_magnitude)
    assert signed_log_product([SignedLogValue.zero(), big[0]]).sign == 0


def test_signed_log_value_roundtrip():
    for x in (-3.5, 1e-300, 2.0):
        assert SignedLogValue.from_value(x).value == pytest.approx(x, rel=1e-15)
    with pytest.raises(ValueError):
        SignedLogValue(0.0, 2)


@pytest.mark.parametrize("k", range(5))
def test_gamma_germ_residue(k):
    eps = 1e-7
    g = gamma_germ(-k, 2.0)
    assert g.order == -1
    assert g.coefficient / eps == pytest.approx(float(mpmath.gamma(-k + 2 * eps)), rel=1e-5)
    r = reciprocal_gamma_germ(-k, 2.0)
    assert r.order == 1
    assert (g * r).limit() == pytest.approx(1.0)


def test_germ_limits():
    assert Germ(3.0, 1).limit() == 0.0
    assert Germ(3.0, 0).limit() == 3.0
    assert reciprocal_gamma_germ(-2, 0).is_zero
    with pytest.raises(PoleError):
        Germ(1.0, -1).limit()
    with pytest.raises(PoleError):
        gamma_germ(-1, 0)
