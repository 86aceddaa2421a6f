"""Finite-blocklength rate and error probability outputs.

The normal approximation trades capacity against a dispersion penalty
scaled by the blocklength: rate = E[C] - sqrt(E[V]/tau) Q^-1(eps)/ln2.
Solving the same relation for eps at a target per-antenna rate gives the
block error probability; the two operations are exact inverses of each
other through the Q function.
"""

import math
from dataclasses import dataclass

from .config import DerivedParams
from .errors import ConfigError, DegenerateDispersionError
from .moments import (MomentMethod, expected_capacity, expected_dispersion)
from .specfun import gaussian_q, gaussian_q_inv

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class RateResult:
    """Average achievable rate split into its two terms, bits/s/Hz.

    rate == capacity_term - penalty_term by construction; negative rates
    are reported as-is (below_zero flags them) since short blocklengths
    legitimately drive the bound past zero.
    """

    rate: float
    capacity_term: float
    penalty_term: float
    method: MomentMethod

    @property
    def below_zero(self) -> bool:
        return self.rate < 0.0


def _method_of(lx) -> MomentMethod:
    return (MomentMethod.INTEGRAL_EXACT
            if getattr(lx, "variant", "exact") == "exact"
            else MomentMethod.INTEGRAL_APPROX)


def _check_tau_epsilon(tau, epsilon):
    if not (isinstance(tau, int) and not isinstance(tau, bool) and tau >= 1):
        raise ConfigError(f"tau must be a positive integer, got {tau!r}")
    # epsilon = 0.5 is admitted as the analytic zero-penalty point
    if not (0.0 < epsilon <= 0.5):
        raise ConfigError(f"epsilon must lie in (0, 0.5], got {epsilon!r}")


def average_rate(p: DerivedParams, lx, tau: int, epsilon: float) -> RateResult:
    """Average achievable rate at blocklength tau and error target epsilon."""
    _check_tau_epsilon(tau, epsilon)
    ec = expected_capacity(p, lx)
    ev = expected_dispersion(p, lx)
    penalty = math.sqrt(ev / tau) * gaussian_q_inv(epsilon) / _LN2
    return RateResult(rate=ec - penalty, capacity_term=ec,
                      penalty_term=penalty, method=_method_of(lx))


def normalized_rate(p: DerivedParams, lx, tau: int, epsilon: float) -> float:
    """Per-antenna rate; the penalty shrinks like 1/sqrt(M tau).

    Writing the rate per antenna, (E[C]/M) - sqrt((E[V]/M) / (M tau))
    * Q^-1(eps)/ln2, shows extra antennas damp the finite-length penalty
    even at fixed per-antenna capacity.
    """
    return average_rate(p, lx, tau, epsilon).rate / p.m


def block_error_probability(p: DerivedParams, lx, tau: int,
                            rate_per_antenna: float) -> float:
    """Error probability of transmitting rate_per_antenna bits per antenna.

    Inverts the rate relation: eps = Q(ln2 (E[C] - r M) sqrt(tau / E[V])).
    """
    if not (isinstance(tau, int) and not isinstance(tau, bool) and tau >= 1):
        raise ConfigError(f"tau must be a positive integer, got {tau!r}")
    if not (rate_per_antenna >= 0.0 and math.isfinite(rate_per_antenna)):
        raise ConfigError(
            f"rate_per_antenna must be finite and nonnegative, got {rate_per_antenna!r}")
    ec = expected_capacity(p, lx)
    ev = expected_dispersion(p, lx)
    if ev / p.m < 1e-12:
        raise DegenerateDispersionError(
            f"dispersion {ev} is numerically zero; the error probability "
            f"is a step function of the target rate here")
    arg = _LN2 * (ec - rate_per_antenna * p.m) * math.sqrt(tau / ev)
    return gaussian_q(arg)
