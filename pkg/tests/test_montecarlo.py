"""Simulation-layer checks: geometry sampling, spectral statistics, and
the moment estimator's determinism and degenerate cases.
"""

import math

import numpy as np
import pytest

from cfrate.config import SystemConfig, derive_params
from cfrate.errors import NonHermitianError
from cfrate.montecarlo import (MomentEstimates, aggregate_fading,
                               capacity_from_spectrum, conditional_statistics,
                               dispersion_from_spectrum, draw_aggregate_fading,
                               hermitian_eigenvalues, mc_moments, path_loss,
                               sample_gram_spectrum, sample_ppp_disk)

LAM_EN8 = 8.0 / (math.pi * 2500.0)
THETA = (3.7 - 2.0 * 50.0 ** -1.7) / (1.7 * 2500.0)


def base_config(**overrides):
    kw = dict(expected_ap_count=8.0, antenna_ratio=8.0, gamma_db=-20.0,
              user_antennas=2)
    kw.update(overrides)
    return SystemConfig(**kw)


def test_ppp_count_and_support():
    rng = np.random.default_rng(0)
    draws = 20000
    counts = []
    for _ in range(draws):
        d = sample_ppp_disk(LAM_EN8, 50.0, rng)
        counts.append(len(d))
        assert np.all((d >= 0.0) & (d <= 50.0))
    mean = np.mean(counts)
    # Poisson(8): standard error of the mean count is sqrt(8 / draws)
    assert abs(mean - 8.0) <= 4.0 * math.sqrt(8.0 / draws)


def test_ppp_radial_density_uniform_in_area():
    # with intensity uniform on the disk, d^2 is uniform on [0, R^2]
    rng = np.random.default_rng(1)
    d = np.concatenate([sample_ppp_disk(LAM_EN8, 50.0, rng)
                        for _ in range(20000)])
    frac_inner = np.mean(d <= 50.0 / math.sqrt(2.0))
    assert abs(frac_inner - 0.5) <= 4.0 * math.sqrt(0.25 / len(d))


def test_empty_deployment():
    rng = np.random.default_rng(2)
    d = sample_ppp_disk(0.0, 50.0, rng)
    assert d.shape == (0,)
    assert aggregate_fading(d, 3.7) == 0.0


def test_path_loss_values():
    assert path_loss(0.5, 3.7) == 1.0
    assert path_loss(1.0, 3.7) == 1.0
    assert path_loss(2.0, 3.7) == pytest.approx(2.0 ** -3.7, rel=1e-15)
    out = path_loss([0.5, 2.0], 3.7)
    assert out.shape == (2,)
    assert aggregate_fading([0.5, 2.0], 3.7) == pytest.approx(
        1.0 + 2.0 ** -3.7, rel=1e-15)


def test_aggregate_fading_mean():
    x = draw_aggregate_fading(LAM_EN8, 50.0, 3.7, trials=40000, seed=9)
    se = x.std(ddof=1) / math.sqrt(len(x))
    assert abs(x.mean() - 8.0 * THETA) <= 4.0 * se


def test_eigenvalues_identity_and_diagonal():
    np.testing.assert_allclose(hermitian_eigenvalues(np.eye(3)), [1, 1, 1],
                               atol=1e-12)
    np.testing.assert_allclose(hermitian_eigenvalues(np.diag([3.0, 1.0, 2.0])),
                               [1, 2, 3], atol=1e-12)


def test_eigenvalues_complex_pair():
    h = np.array([[2.0, 1j], [-1j, 2.0]])
    np.testing.assert_allclose(hermitian_eigenvalues(h), [1.0, 3.0],
                               atol=1e-10)


def test_eigenvalues_match_lapack():
    rng = np.random.default_rng(4)
    z = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = z + z.conj().T
    np.testing.assert_allclose(hermitian_eigenvalues(h),
                               np.linalg.eigvalsh(h), rtol=1e-10, atol=1e-10)


def test_eigenvalues_reject_bad_input():
    with pytest.raises(NonHermitianError):
        hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(NonHermitianError):
        hermitian_eigenvalues(np.zeros((2, 3)))


def test_gram_spectrum_empty_deployment():
    p = derive_params(base_config())
    mu = sample_gram_spectrum(np.array([]), p, np.random.default_rng(0))
    np.testing.assert_allclose(mu, np.zeros(p.m), atol=0.0)


def test_gram_trace_matches_wishart_mean():
    # each antenna pair contributes (1 - sigma_e2) gain per access point,
    # so E[trace] = M L (1 - sigma_e2) X for the estimated Gram matrix
    p = derive_params(base_config(sigma_e2=0.1))
    d = np.array([0.5, 2.0])
    x = aggregate_fading(d, p.alpha)
    rng = np.random.default_rng(5)
    traces = np.array([sample_gram_spectrum(d, p, rng).sum()
                       for _ in range(3000)])
    want = p.m * p.l * (1.0 - p.sigma_e2) * x
    se = traces.std(ddof=1) / math.sqrt(len(traces))
    assert abs(traces.mean() - want) <= 4.0 * se


def test_spectrum_statistics_zero_and_saturation():
    p = derive_params(base_config())
    assert capacity_from_spectrum(np.zeros(p.m), p) == 0.0
    assert dispersion_from_spectrum(np.zeros(p.m), p) == 0.0
    assert dispersion_from_spectrum(np.full(p.m, 1e12), p) == pytest.approx(
        float(p.m), rel=1e-9)


def test_spectrum_statistics_single_stream():
    # one antenna, sigma_e2 = 0: the SNR weight is rho itself, so an
    # eigenvalue of 1/rho gives exactly one bit and dispersion 3/4
    p = derive_params(base_config(user_antennas=1, antenna_ratio=16.0))
    mu = np.array([1.0 / p.rho])
    assert capacity_from_spectrum(mu, p) == pytest.approx(1.0, rel=1e-12)
    assert dispersion_from_spectrum(mu, p) == pytest.approx(0.75, rel=1e-12)


def test_capacity_monotone_in_spectrum():
    p = derive_params(base_config())
    lo = capacity_from_spectrum(np.array([1.0, 2.0]), p)
    hi = capacity_from_spectrum(np.array([2.0, 3.0]), p)
    assert hi > lo


def test_conditional_statistics_closed_form():
    p = derive_params(base_config())
    c, v = conditional_statistics(1.0, p)
    assert c == pytest.approx(p.m * math.log2(1.0 + 1.0 / p.beta), rel=1e-14)
    assert v == pytest.approx(
        p.m * (1.0 - (p.beta / (p.beta + 1.0)) ** 2), rel=1e-14)
    c0, v0 = conditional_statistics(0.0, p)
    assert c0 == 0.0 and v0 == 0.0


def test_mc_moments_empty_deployment():
    cfg = base_config(expected_ap_count=0.0)
    for mode in ("large_scale_only", "full"):
        est = mc_moments(cfg, trials=100, inner_small_scale=2, mode=mode,
                         seed=0)
        assert est.mean_capacity == 0.0 and est.var_capacity == 0.0
        assert est.mean_dispersion == 0.0 and est.var_dispersion == 0.0


def test_mc_moments_seed_determinism():
    cfg = base_config()
    a = mc_moments(cfg, trials=500, seed=7)
    b = mc_moments(cfg, trials=500, seed=7)
    c = mc_moments(cfg, trials=500, seed=8)
    assert a == b
    assert a != c
    assert isinstance(a, MomentEstimates)
    assert a.mode == "large_scale_only" and a.trials == 500


def test_mc_moments_small_scale_fading_costs_capacity():
    # with finitely many antennas, averaging the log over fading loses
    # capacity relative to the channel-hardened conditional value; the two
    # runs share the deployment stream, so the comparison is paired
    cfg = base_config()
    ls = mc_moments(cfg, trials=400, mode="large_scale_only", seed=3)
    fu = mc_moments(cfg, trials=400, inner_small_scale=30, mode="full",
                    seed=3)
    assert fu.mean_capacity < ls.mean_capacity
    assert fu.inner == 30 and ls.inner == 1


def test_mc_moments_input_validation():
    cfg = base_config()
    with pytest.raises(ValueError):
        mc_moments(cfg, trials=500, mode="typo")
    with pytest.raises(ValueError):
        mc_moments(cfg, trials=1)
    with pytest.raises(ValueError):
        mc_moments(cfg, trials=10, inner_small_scale=0, mode="full")
    with pytest.raises(TypeError):
        mc_moments({"expected_ap_count": 8.0}, trials=10)
