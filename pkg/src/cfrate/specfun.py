"""Special functions used by the closed-form moment expressions.

Everything here is scalar double precision. Products and quotients of gamma
functions are assembled in the log domain (sums of log-gamma values with
explicit sign bookkeeping) so that large intermediate factors never overflow.
"""

import math
from dataclasses import dataclass

from .errors import DomainError, SeriesOverflowError, ToleranceError

EULER_GAMMA = 0.5772156649015328606065120900824024

# log-terms beyond this cannot be exponentiated in double precision
_LOG_HUGE = 700.0


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    if not x > 0.0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def gamma_neg(x: float) -> float:
    """Gamma(x) for -1 < x < 0, via the recurrence Gamma(x) = Gamma(x + 1) / x."""
    if not (-1.0 < x < 0.0):
        raise DomainError(f"gamma_neg requires -1 < x < 0, got {x}")
    return math.exp(math.lgamma(x + 1.0)) / x


def digamma_int(m: int) -> float:
    """Digamma at a positive integer: psi(1) = -gamma, psi(m) = psi(1) + sum_{i<m} 1/i."""
    if not isinstance(m, (int,)) or isinstance(m, bool):
        raise DomainError(f"digamma_int requires an integer argument, got {m!r}")
    if m < 1:
        raise DomainError(f"digamma_int requires m >= 1, got {m}")
    return math.fsum([-EULER_GAMMA] + [1.0 / i for i in range(1, m)])


def _gamma_signed(x: float):
    """(log|Gamma(x)|, sign) for any x that is not a non-positive integer."""
    if x > 0.0:
        return math.lgamma(x), 1.0
    if x == math.floor(x):
        raise DomainError(f"gamma pole at non-positive integer {x}")
    # sign alternates on the negative axis: (-1, 0) negative, (-2, -1) positive, ...
    sign = -1.0 if (math.ceil(-x) % 2 == 1) else 1.0
    return math.lgamma(x), sign


def _gamma_any(x: float) -> float:
    logg, sign = _gamma_signed(x)
    return sign * math.exp(logg)


def _lower_series(a: float, x: float) -> float:
    """gamma(a, x) lower kind by the alternating power series.

    gamma(a, x) = sum_n (-1)^n x^(a+n) / (n! (a + n)), valid for all x >= 0
    and any a that is not zero or a negative integer.
    """
    if x == 0.0:
        if a > 0.0:
            return 0.0
        raise DomainError(
            f"lower incomplete gamma diverges at x = 0 for a = {a} <= 0"
        )
    log_x = math.log(x)
    terms = []
    log_fact = 0.0  # log n!
    small_run = 0
    for n in range(10000):
        if n > 0:
            log_fact += math.log(n)
        log_t = (a + n) * log_x - log_fact
        if log_t > _LOG_HUGE:
            raise SeriesOverflowError(
                f"lower incomplete gamma series term overflow at n={n}, a={a}, x={x}"
            )
        term = math.exp(log_t) / (a + n)
        if n % 2 == 1:
            term = -term
        terms.append(term)
        partial = math.fsum(terms)
        if partial != 0.0 and abs(term) < 1e-17 * abs(partial) and n > x:
            small_run += 1
            if small_run >= 3:
                return math.fsum(terms)
        else:
            small_run = 0
    raise ToleranceError(
        f"lower incomplete gamma series did not converge for a={a}, x={x}",
        partial=math.fsum(terms),
    )


def _upper_cf(a: float, x: float) -> float:
    """Gamma(a, x) upper kind by the Lentz continued fraction, reliable for x >= 1."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    f = d
    for n in range(1, 400):
        an = -n * (n - a)
        b += 2.0
        d = an * d + b
        if d == 0.0:
            d = tiny
        c = b + an / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return math.exp(-x + a * math.log(x)) * f
    raise ToleranceError(
        f"upper incomplete gamma continued fraction did not converge for a={a}, x={x}",
        partial=math.exp(-x + a * math.log(x)) * f,
    )


def incomplete_gamma(a: float, x: float, kind: str = "upper") -> float:
    """Incomplete gamma of either kind, supporting negative non-integer a.

    The lower kind is summed by its alternating power series; the upper kind
    uses a continued fraction for x >= 1 and complementarity against the
    series otherwise. upper + lower = Gamma(a) for every valid (a, x).
    """
    if kind not in ("upper", "lower"):
        raise DomainError(f"kind must be 'upper' or 'lower', got {kind!r}")
    if x < 0.0:
        raise DomainError(f"incomplete_gamma requires x >= 0, got {x}")
    if a == 0.0 or (a < 0.0 and a == math.floor(a)):
        raise DomainError(f"incomplete_gamma pole at a = {a}")
    if kind == "lower":
        return _lower_series(a, x)
    if x >= 1.0:
        return _upper_cf(a, x)
    return _gamma_any(a) - _lower_series(a, x)


@dataclass
class SeriesResult:
    """Outcome of a truncated series evaluation."""

    value: float
    terms_used: int
    truncation_bound: float  # absolute bound on the discarded tail


def _wright_sum_mp(mp, a, big_a, z, tol, max_terms):
    """One summation pass at the current mpmath precision.

    Returns (sum, peak term magnitude, terms used, tail bound) or raises
    ToleranceError when max_terms is hit before the tail certifies.
    """
    z_mp = mp.mpf(z)
    a_mp = mp.mpf(a)
    big_a_mp = mp.mpf(big_a)
    total = mp.mpf(0)
    z_pow = mp.mpf(1)
    fact = mp.mpf(1)
    peak = mp.mpf(0)
    past_peak = False
    small_run = 0
    prev_abs = None
    for n in range(max_terms):
        if n > 0:
            z_pow *= z_mp
            fact *= n
        # the gamma argument must be assembled at working precision: the
        # cancellation amplifies per-term rounding by the peak-to-sum
        # ratio, so double-rounded arguments poison the sum
        term = mp.gamma(a_mp + big_a_mp * n) * z_pow / fact
        t_abs = abs(term)
        total += term
        if t_abs > peak:
            peak = t_abs
        elif t_abs < peak:
            past_peak = True
        scale = abs(total) if total != 0 else peak
        ratio = t_abs / prev_abs if (prev_abs is not None and prev_abs != 0) else mp.mpf(1)
        if past_peak and t_abs <= tol * scale:
            small_run += 1
        else:
            small_run = 0
        if small_run >= 3 and ratio <= mp.mpf("0.5"):
            # tail <= t_abs * (r + r^2 + ...) <= t_abs for ratio r <= 1/2
            return total, peak, n + 1, t_abs
        prev_abs = t_abs
    raise ToleranceError(
        f"wright_psi_1_0 did not converge within {max_terms} terms "
        f"(a={a}, A={big_a}, z={z})",
        partial=SeriesResult(float(total), max_terms, float(t_abs)),
    )


def wright_psi_1_0(a: float, big_a: float, z: float, tol: float = 1e-12,
                   max_terms: int = 10000) -> SeriesResult:
    """Generalized hypergeometric-type series sum_n Gamma(a + A n) z^n / n!.

    Requires A in (0, 1) so the series is entire in z. For negative z of
    even moderate size the series cancels catastrophically: the largest
    term can exceed the sum by fifteen or more orders of magnitude, far
    beyond what double precision can absorb, so the summation runs in
    mpmath with the working precision raised until the cancellation is
    covered with twenty guard digits. The returned truncation_bound adds
    the certified tail of the stopped series and the representation error
    at the final precision.
    """
    if not (0.0 < big_a < 1.0):
        raise DomainError(f"wright_psi_1_0 requires 0 < A < 1, got {big_a}")
    for n in range(max_terms):
        arg = a + big_a * n
        if arg > 0.0:
            break
        if abs(arg - round(arg)) < 1e-12:
            raise DomainError(
                f"wright_psi_1_0 hit a gamma pole at a + A n = {arg} (n={n})"
            )
    if z == 0.0:
        _gamma_signed(a)  # reject poles with the usual error
        # math.gamma is exact at small integers, which keeps the
        # zero-density limits of the series forms exactly zero
        return SeriesResult(math.gamma(a), 1, 0.0)

    import mpmath as mp

    dps = 30
    while True:
        with mp.workdps(dps):
            total, peak, used, tail = _wright_sum_mp(mp, a, big_a, z, mp.mpf(tol),
                                                     max_terms)
            if total == 0:
                needed = 2 * dps
            elif peak > abs(total):
                needed = int(mp.log10(peak / abs(total))) + 25
            else:
                needed = 25
            if needed <= dps or dps >= 500:
                value_mp = total
                bound_mp = tail + peak * mp.mpf(10) ** (5 - dps)
                break
        dps = min(max(needed, 2 * dps), 500)
    value = float(value_mp)
    if math.isinf(value):
        raise SeriesOverflowError(
            f"wright_psi_1_0 sum overflows double precision at a={a}, "
            f"A={big_a}, z={z}"
        )
    return SeriesResult(value, used, float(bound_mp) + abs(value) * 1e-16)


_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gaussian_q(x: float) -> float:
    """Gaussian tail probability Q(x) = P(N(0,1) > x)."""
    return 0.5 * math.erfc(x / _SQRT2)


def _q_inv_rational(eps: float) -> float:
    # rational initial guess for the normal tail quantile, |error| < 4.5e-4
    t = math.sqrt(-2.0 * math.log(eps))
    return t - (2.515517 + 0.802853 * t + 0.010328 * t * t) / (
        1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t
    )


def gaussian_q_inv(eps: float) -> float:
    """Inverse of gaussian_q on (0, 1), refined by two Newton steps on Q."""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"gaussian_q_inv requires 0 < eps < 1, got {eps}")
    if eps == 0.5:
        return 0.0
    if eps < 0.5:
        x = _q_inv_rational(eps)
    else:
        x = -_q_inv_rational(1.0 - eps)
    for _ in range(2):
        pdf = _INV_SQRT_2PI * math.exp(-0.5 * x * x)
        if pdf == 0.0:
            break
        x += (gaussian_q(x) - eps) / pdf
    return x
