"""Finite-blocklength rate statistics for dense uplink deployments.

The package evaluates the average achievable rate, its capacity and
dispersion building blocks, and the block error probability of an uplink
where a user with a handful of antennas is served jointly by many small
access points scattered over a disk. Everything is driven by the Laplace
transform of the aggregate channel gain; closed forms are backed by an
independent Monte Carlo path and a self-verification suite.

Typical use:

    from cfrate import SystemConfig, derive_params, cached_exact, average_rate

    cfg = SystemConfig.from_mapping({"E_N": 8, "M": 2, "omega": 8,
                                     "gamma_db": -20})
    p = derive_params(cfg)
    lx = cached_exact(p.lam, p.radius, p.alpha)
    result = average_rate(p, lx, tau=100, epsilon=1e-7)
"""

from .config import (ConvergenceReport, DerivedParams, SystemConfig,
                     check_convergence, derive_params, mean_single_ap_gain)
from .errors import (CfrateError, ConfigError, ConstraintError,
                     DegenerateDispersionError, DivergenceError, DomainError,
                     InternalConsistencyError, NonHermitianError,
                     SeriesOverflowError, ToleranceError)
from .laplace import (ApproxLaplace, EmpiricalLaplace, ExactLaplace,
                      cached_exact, empirical_mgf, laplace_approx,
                      laplace_exact)
from .moments import (MomentMethod, evaluator_for, expected_capacity,
                      expected_capacity_with_error, expected_dispersion,
                      expected_dispersion_simplified,
                      expected_dispersion_simplified_with_error,
                      expected_dispersion_with_error, var_capacity,
                      var_capacity_with_error, var_dispersion,
                      var_dispersion_simplified,
                      var_dispersion_simplified_with_error,
                      var_dispersion_with_error)
from .montecarlo import (MomentEstimates, aggregate_fading,
                         capacity_from_spectrum, conditional_statistics,
                         dispersion_from_spectrum, draw_aggregate_fading,
                         hermitian_eigenvalues, mc_moments, path_loss,
                         sample_gram_spectrum, sample_ppp_disk)
from .quadrature import (QuadratureResult, integrate_double_semi_infinite,
                         integrate_finite, integrate_semi_infinite)
from .rate import (RateResult, average_rate, block_error_probability,
                   normalized_rate)
from .specfun import (digamma_int, gamma_neg, gaussian_q, gaussian_q_inv,
                      incomplete_gamma, wright_psi_1_0)
from .sweep import (FIGURES, METHODS, QUANTITIES, SweepResult, SweepRow,
                    SweepSpec, figure_spec, run_figure, run_sweep)

__version__ = "0.1.0"

__all__ = [
    "ApproxLaplace", "CfrateError", "ConfigError", "ConstraintError",
    "ConvergenceReport", "DegenerateDispersionError", "DerivedParams",
    "DivergenceError", "DomainError", "EmpiricalLaplace", "ExactLaplace",
    "FIGURES", "InternalConsistencyError", "METHODS", "MomentEstimates",
    "MomentMethod", "NonHermitianError", "QUANTITIES", "QuadratureResult",
    "RateResult", "SeriesOverflowError", "SweepResult", "SweepRow",
    "SweepSpec", "SystemConfig", "ToleranceError", "aggregate_fading",
    "average_rate", "block_error_probability", "cached_exact",
    "capacity_from_spectrum", "check_convergence", "conditional_statistics",
    "derive_params", "digamma_int", "dispersion_from_spectrum",
    "draw_aggregate_fading", "empirical_mgf", "evaluator_for",
    "expected_capacity", "expected_capacity_with_error",
    "expected_dispersion", "expected_dispersion_simplified",
    "expected_dispersion_simplified_with_error",
    "expected_dispersion_with_error", "figure_spec", "gamma_neg",
    "gaussian_q", "gaussian_q_inv", "hermitian_eigenvalues",
    "incomplete_gamma", "integrate_double_semi_infinite", "integrate_finite",
    "integrate_semi_infinite", "laplace_approx", "laplace_exact",
    "mc_moments", "mean_single_ap_gain", "normalized_rate", "path_loss",
    "run_figure", "run_sweep", "sample_gram_spectrum", "sample_ppp_disk",
    "var_capacity", "var_capacity_with_error", "var_dispersion",
    "var_dispersion_simplified", "var_dispersion_simplified_with_error",
    "var_dispersion_with_error", "wright_psi_1_0",
]
