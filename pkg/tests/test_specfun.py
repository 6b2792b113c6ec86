import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wpaoi import specfun as sf
from wpaoi.errors import ConvergenceError, DomainError
from wpaoi.selftest import K1_ORACLE

mp.mp.dps = 40


def test_gamma_q_zero_argument_is_one():
    for k in (1, 2, 7, 300):
        assert sf.regularized_gamma_q(k, 0.0) == 1.0


@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 7.5, 40.0])
def test_gamma_q_shape_one_is_exponential(x):
    assert sf.regularized_gamma_q(1, x) == pytest.approx(math.exp(-x), rel=1e-14)


def test_gamma_q_hand_sum():
    # e^-2 (1 + 2 + 2)
    assert sf.regularized_gamma_q(3, 2.0) == pytest.approx(5 * math.exp(-2), rel=1e-14)
    assert sf.regularized_gamma_q(3, 2.0) == pytest.approx(0.676676, abs=1e-6)


@pytest.mark.parametrize("k,x", [(5, 3.2), (40, 55.0), (400, 380.0), (2000, 2100.0), (3, 700.0)])
def test_gamma_q_against_mpmath(k, x):
    ref = float(mp.gammainc(k, a=mp.mpf(x), regularized=True))
    got = sf.regularized_gamma_q(k, x)
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-300)


def test_gamma_q_monotone_grid():
    # up to rounding: values next to 1 may wobble by an ulp
    ulp = 4e-16
    xs = np.linspace(0, 30, 61)
    for k in range(1, 25):
        q = [sf.regularized_gamma_q(k, x) for x in xs]
        assert all(a >= b - ulp for a, b in zip(q, q[1:]))
    for x in xs:
        q = [sf.regularized_gamma_q(k, x) for k in range(1, 40)]
        assert all(a <= b + ulp for a, b in zip(q, q[1:]))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 150), st.floats(0.0, 200.0))
def test_gamma_q_plus_p_is_one(k, x):
    assert abs(sf.regularized_gamma_q(k, x) + sf.regularized_gamma_p(k, x) - 1.0) <= 1e-12


def test_gamma_domain_errors():
    with pytest.raises(DomainError):
        sf.regularized_gamma_q(0, 1.0)
    with pytest.raises(DomainError):
        sf.regularized_gamma_q(2.5, 1.0)
    with pytest.raises(DomainError):
        sf.regularized_gamma_q(2, -1.0)


def test_gamma_max_terms_raises():
    with pytest.raises(ConvergenceError):
        sf.regularized_gamma_q(50, 1.0, sf.Tolerance(max_terms=10))


def test_tolerance_validation():
    with pytest.raises(ValueError):
        sf.Tolerance(rel_eps=0.0)
    with pytest.raises(ValueError):
        sf.Tolerance(max_terms=0)


def test_k1_small_argument_limit():
    x = 1e-8
    assert x * sf.bessel_k1(x) == pytest.approx(1.0, abs=1e-6)


def test_k1_reference_values():
    assert sf.bessel_k1(1.0) == pytest.approx(0.60190723, rel=1e-8)
    assert sf.bessel_k1(10.0) == pytest.approx(1.8648e-5, rel=1e-4)


def test_k1_frozen_oracle_is_mpmath():
    # guard against a typo in the frozen table
    for x, ref in K1_ORACLE:
        assert float(mp.besselk(1, mp.mpf(repr(x)))) == pytest.approx(ref, rel=1e-15)


@pytest.mark.parametrize("x,ref", K1_ORACLE)
def test_k1_oracle_points(x, ref):
    assert abs(sf.bessel_k1(x) / ref - 1.0) <= 1e-10


def test_k1_continuous_across_crossover():
    c = sf.K1_CROSSOVER
    for x in (c * (1 - 1e-12), c, c * (1 + 1e-12), c - 1e-6, c + 1e-6):
        ref = float(mp.besselk(1, mp.mpf(x)))
        assert abs(sf.bessel_k1(x) / ref - 1) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 600.0))
def test_k1_against_mpmath_random(x):
    ref = float(mp.besselk(1, mp.mpf(x)))
    assert abs(sf.bessel_k1(x) / ref - 1) <= 1e-10


def test_k1_scaled_and_log_forms():
    for x in (0.01, 1.5, 3.0, 50.0, 800.0):
        ref = mp.besselk(1, mp.mpf(x))
        assert sf.bessel_k1e(x) == pytest.approx(float(ref * mp.exp(x)), rel=1e-12)
        assert sf.log_bessel_k1(x) == pytest.approx(float(mp.log(ref)), rel=1e-12)


def test_k1_positive_and_decreasing():
    xs = np.geomspace(1e-6, 700, 400)
    vals = [sf.bessel_k1(x) for x in xs]
    assert all(v > 0 for v in vals)
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_k1_domain(x):
    with pytest.raises(DomainError):
        sf.bessel_k1(x)


def test_log_factorial():
    assert sf.log_factorial(0) == 0.0
    assert sf.log_factorial(1) == 0.0
    assert sf.log_factorial(5) == pytest.approx(math.log(120), rel=1e-15)
    assert sf.log_factorial(170) == pytest.approx(math.lgamma(171), rel=1e-14)
    assert sf.log_factorial(1000) == pytest.approx(math.lgamma(1001), rel=1e-14)
    with pytest.raises(DomainError):
        sf.log_factorial(-1)
