import math

import numpy as np
import pytest

from magflow.weights import make_weights


def test_spot_values_sigma_one():
    w = make_weights(1.0, 8)
    assert w.gamma_sq(1) == pytest.approx(8 * math.e, rel=1e-14)
    assert w.gamma_sq(2) == pytest.approx(128 * math.e**2, rel=1e-14)
    assert 16 * w.gamma_sq(1) < w.gamma_sq(2)


def test_weights_symmetric_in_k():
    w = make_weights(0.7, 16)
    for k in range(1, 17):
        assert w.log_gamma_sq(k) == w.log_gamma_sq(-k)


def test_log_domain_no_overflow_to_64():
    for sigma in (0.1, 1.0, 3.0):
        w = make_weights(sigma, 64)
        vals = [w.log_gamma_sq(k) for k in range(65)]
        assert all(np.isfinite(vals))
        cert = w.certificate()
        assert cert.ok


def test_recurrences_strict():
    w = make_weights(0.5, 32)
    for k in range(3, 33):
        assert w.log_gamma_sq(k) > math.log(4.0) + w.log_gamma_sq(k - 2)
    for k in range(2, 33):
        assert w.log_gamma_sq(k) > math.log(8.0 * k) + w.log_gamma_sq(k - 1)
    for k in range(1, 33):
        assert w.log_gamma_sq(k - 1) <= w.log_gamma_sq(k) - 0.5


def test_sigma_must_be_positive():
    with pytest.raises(ValueError):
        make_weights(0.0, 8)
    with pytest.raises(ValueError):
        make_weights(-1.0, 8)


def test_k_range_enforced():
    w = make_weights(1.0, 8)
    with pytest.raises(ValueError):
        w.log_gamma_sq(9)
