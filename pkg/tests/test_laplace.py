"""Aggregate-gain transform checks.

Independent reference values, computed with 40-digit arbitrary precision
arithmetic from the defining radial integral:

    log L_exact(1) at E_N = 8, R = 50, alpha = 3.7
        = -0.005289252564858894319
    saturation limit L(s -> inf) = exp(-E_N)
        = 0.00033546262790251183882 for E_N = 8
"""

import math

import numpy as np
import pytest

from cfrate.laplace import (ApproxLaplace, EmpiricalLaplace, ExactLaplace,
                            cached_exact, empirical_mgf, laplace_approx,
                            laplace_exact)

LAM_EN8 = 8.0 / (math.pi * 2500.0)


def exact8():
    return cached_exact(LAM_EN8, 50.0, 3.7)


def test_transform_at_zero_is_one():
    assert exact8().value(0.0) == pytest.approx(1.0, rel=1e-14)
    assert ApproxLaplace(LAM_EN8, 50.0, 3.7).value(0.0) == 1.0
    mean, se = EmpiricalLaplace(LAM_EN8, 50.0, 3.7, samples=2000).mgf(0.0)
    assert mean == 1.0 and se == 0.0


def test_exact_frozen_point():
    assert exact8().log_value(1.0) == pytest.approx(
        -0.005289252564858894319, rel=1e-9)


def test_exact_saturates_at_void_probability():
    # for huge s only deployments with no access point contribute
    assert exact8().value(1e9) == pytest.approx(math.exp(-8.0), rel=1e-12)


def test_small_argument_slope_is_mean_gain():
    # -d log L / ds at 0+ equals the mean aggregate gain E_N * theta
    theta = (3.7 - 2.0 * 50.0 ** -1.7) / (1.7 * 2500.0)
    h = 1e-6
    slope = -exact8().log_value(h) / h
    assert slope == pytest.approx(8.0 * theta, rel=1e-4)


def test_log_transform_superadditive():
    lx = exact8()
    for u, v in ((0.1, 0.1), (0.5, 1.5), (2.0, 5.0)):
        assert lx.log_value(u + v) >= lx.log_value(u) + lx.log_value(v) - 1e-12


def test_transform_positive_decreasing_log_convex():
    lx = exact8()
    s = np.linspace(0.1, 10.0, 25)
    vals = np.array([lx.value(t) for t in s])
    logs = np.array([lx.log_value(t) for t in s])
    assert np.all(vals > 0.0)
    assert np.all(np.diff(vals) < 0.0)
    assert np.all(np.diff(logs, 2) >= -1e-10)


def test_exact_vectorized_matches_scalar():
    lx = exact8()
    s = np.array([0.0, 0.3, 1.0, 4.0])
    batch = lx.log_value(s)
    singles = np.array([lx.log_value(float(t)) for t in s])
    # the shared panel set refines between calls, so agreement is limited
    # by the evaluator tolerance rather than exact
    assert np.allclose(batch, singles, rtol=1e-10, atol=5e-13)


def test_empty_deployment_transform_is_unity():
    lx = ExactLaplace(0.0, 50.0, 3.7)
    assert lx.log_value(3.0) == 0.0
    mean, se = EmpiricalLaplace(0.0, 50.0, 3.7, samples=100).mgf(2.0)
    assert mean == 1.0 and se == 0.0


def test_approx_coefficients():
    ap = ApproxLaplace(LAM_EN8, 50.0, 3.7)
    assert ap.b < 0.0 < ap.c
    # c is the finite-disk correction slope
    want_c = 2.0 * math.pi * LAM_EN8 * 50.0 ** -1.7 / 1.7
    assert ap.c == pytest.approx(want_c, rel=1e-14)
    # at tiny s the sublinear term dominates
    s = 1e-8
    assert ap.log_value(s) / s ** (2.0 / 3.7) == pytest.approx(ap.b, rel=1e-5)


def test_approx_tracks_exact_at_moderate_argument():
    ap = ApproxLaplace(LAM_EN8, 50.0, 3.7)
    ex = exact8()
    gap = abs(ap.log_value(1.0) - ex.log_value(1.0)) / abs(ex.log_value(1.0))
    assert gap < 0.2


def test_approx_warns_once_beyond_validity():
    ap = ApproxLaplace(LAM_EN8, 50.0, 3.7)
    assert math.isfinite(ap.s_star) and ap.s_star > 0.0
    with pytest.warns(UserWarning):
        ap.log_value(1.1 * ap.s_star)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ap.log_value(1.2 * ap.s_star)  # second call stays quiet


def test_empirical_matches_exact_within_sampling_error():
    emp = EmpiricalLaplace(LAM_EN8, 50.0, 3.7, samples=40000, seed=11)
    ex = exact8()
    for s in (0.5, 2.0):
        mean, se = emp.mgf(s)
        assert abs(mean - ex.value(s)) <= 4.0 * se


def test_empirical_seed_determinism():
    a = EmpiricalLaplace(LAM_EN8, 50.0, 3.7, samples=3000, seed=5).mgf(1.0)
    b = EmpiricalLaplace(LAM_EN8, 50.0, 3.7, samples=3000, seed=5).mgf(1.0)
    c = EmpiricalLaplace(LAM_EN8, 50.0, 3.7, samples=3000, seed=6).mgf(1.0)
    assert a == b
    assert a != c


def test_cached_exact_shares_instances():
    a = cached_exact(LAM_EN8, 50.0, 3.7)
    assert cached_exact(LAM_EN8, 50.0, 3.7) is a
    assert cached_exact(2.0 * LAM_EN8, 50.0, 3.7) is not a


def test_variant_labels():
    assert ExactLaplace(0.0, 50.0, 3.7).variant == "exact"
    assert ApproxLaplace(0.0, 50.0, 3.7).variant == "approx"
    assert EmpiricalLaplace(0.0, 50.0, 3.7, samples=10).variant == "empirical"


def test_one_shot_helpers_agree_with_classes():
    assert laplace_exact(1.0, LAM_EN8, 50.0, 3.7) == pytest.approx(
        exact8().value(1.0), rel=1e-14)
    assert laplace_approx(1.0, LAM_EN8, 50.0, 3.7) == pytest.approx(
        ApproxLaplace(LAM_EN8, 50.0, 3.7).value(1.0), rel=1e-14)
    mean, se = empirical_mgf(1.0, LAM_EN8, 50.0, 3.7, samples=500, seed=3)
    assert 0.0 < mean < 1.0 and se > 0.0


@pytest.mark.parametrize("bad", [
    dict(lam=-0.1, radius=50.0, alpha=3.7),
    dict(lam=0.001, radius=1.0, alpha=3.7),
    dict(lam=0.001, radius=50.0, alpha=2.0),
])
def test_constructor_rejects_bad_geometry(bad):
    with pytest.raises(ValueError):
        ExactLaplace(**bad)
    with pytest.raises(ValueError):
        ApproxLaplace(**bad)


def test_negative_argument_rejected():
    with pytest.raises(ValueError):
        exact8().log_value(-0.5)
    with pytest.raises(ValueError):
        ApproxLaplace(LAM_EN8, 50.0, 3.7).log_value(-0.5)
