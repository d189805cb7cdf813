import math

import numpy as np
import pytest

from fracvar.errors import DomainError, RangeError
from fracvar.specfun import MLParams, gamma_fn, log_gamma, mittag_leffler


def test_gamma_integers():
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-13)


def test_gamma_half():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


def test_gamma_against_reference():
    for x in (0.1, 0.31, 0.9, 1.5, 2.7, 7.25, 19.0, 33.3, 50.0):
        assert gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-12)


def test_gamma_recurrence_sweep():
    # Gamma(x + 1) = x Gamma(x) across a decade of arguments
    for x in np.arange(0.1, 10.01, 0.1):
        lhs = gamma_fn(x + 1.0)
        rhs = x * gamma_fn(float(x))
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_gamma_poles_raise():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(DomainError):
            gamma_fn(x)


def test_gamma_negative_non_integer():
    assert gamma_fn(-0.5) == pytest.approx(-2.0 * math.sqrt(math.pi), rel=1e-12)


def test_log_gamma_matches_reference():
    for x in (0.2, 1.0, 4.5, 80.0, 300.0):
        assert log_gamma(x) == pytest.approx(math.lgamma(x), abs=1e-11, rel=1e-12)


def test_ml_exponential_identity():
    params = MLParams(1.0, 1.0)
    for z in np.linspace(-5.0, 5.0, 21):
        assert mittag_leffler(params, float(z)) == pytest.approx(math.exp(z), rel=1e-12)


def test_ml_beta_two_identity():
    # E_{1,2}(z) = (e^z - 1)/z
    params = MLParams(1.0, 2.0)
    assert mittag_leffler(params, 1.0) == pytest.approx(math.e - 1.0, rel=1e-13)
    assert mittag_leffler(params, -2.0) == pytest.approx((math.exp(-2.0) - 1.0) / -2.0,
                                                         rel=1e-12)


def test_ml_zero_argument():
    for alpha, beta in ((0.5, 0.7), (0.3, 1.9), (1.7, 1.0)):
        assert mittag_leffler(MLParams(alpha, beta), 0.0) == \
            pytest.approx(1.0 / gamma_fn(beta), rel=1e-14)


def test_ml_partial_sums_nondecreasing_for_nonnegative_z():
    # every term is positive for z >= 0, so prefixes of the sum are ordered
    params = MLParams(0.6, 0.9)
    values = [mittag_leffler(params, z) for z in (0.0, 0.5, 1.0, 2.0, 5.0)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_ml_range_error():
    with pytest.raises(RangeError):
        mittag_leffler(MLParams(0.5, 1.0), 31.0)
    with pytest.raises(RangeError):
        mittag_leffler(MLParams(0.5, 1.0), -30.5)


def test_ml_invalid_params():
    with pytest.raises(DomainError):
        MLParams(0.0, 1.0)
    with pytest.raises(DomainError):
        MLParams(0.5, -1.0)
