"""System configuration and derived parameters.

A scenario is described by the deployment geometry (disk radius, access
point density, path loss exponent), the antenna counts on both ends of the
link, the channel estimation quality, and the transmit power. Several
quantities come in equivalent pairs; exactly one member of each pair must
be supplied and the other is filled in:

    ap_density        <->  expected_ap_count   (lam = E_N / (pi R^2))
    ap_antennas       <->  antenna_ratio       (L = omega * M)
    rho               <->  gamma_db            (rho = 10^(gamma_db/10) * R^alpha)

rho is the transmit power normalised by noise, while gamma_db is the
resulting mean SNR in dB at the disk boundary, which is the more natural
knob for sweeps.
"""

import math
from dataclasses import dataclass, fields
from typing import Optional

from .errors import ConfigError

_KEY_ALIASES = {
    "lambda": "ap_density",
    "lam": "ap_density",
    "E_N": "expected_ap_count",
    "en": "expected_ap_count",
    "M": "user_antennas",
    "L": "ap_antennas",
    "omega": "antenna_ratio",
    "R": "radius",
    "sigma_e2": "sigma_e2",
    "alpha": "alpha",
    "tau": "tau",
    "epsilon": "epsilon",
    "rho": "rho",
    "gamma_db": "gamma_db",
}


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _is_int_like(x):
    return not isinstance(x, bool) and (
        isinstance(x, int) or (isinstance(x, float) and float(x).is_integer())
    )


@dataclass
class SystemConfig:
    """Validated scenario description.

    Only one member of each paired field may be given; the counterpart is
    derived in __post_init__. Field names mirror the mathematical symbols
    where one exists (see module docstring for the mapping).
    """

    radius: float = 50.0
    user_antennas: int = 2
    tau: int = 100
    epsilon: float = 1e-7
    alpha: float = 3.7
    sigma_e2: float = 0.0
    ap_density: Optional[float] = None
    expected_ap_count: Optional[float] = None
    antenna_ratio: Optional[float] = None
    ap_antennas: Optional[int] = None
    rho: Optional[float] = None
    gamma_db: Optional[float] = None

    def __post_init__(self):
        r = self.radius
        _require(isinstance(r, (int, float)) and math.isfinite(r) and r > 1.0,
                 f"radius must be a finite number > 1, got {r!r}")
        self.radius = float(r)
        _require(math.isfinite(self.alpha) and self.alpha > 2.0,
                 f"alpha must be > 2 for the mean access point gain to "
                 f"converge, got {self.alpha!r}")
        self.alpha = float(self.alpha)
        _require(_is_int_like(self.user_antennas) and self.user_antennas >= 1,
                 f"user_antennas must be a positive integer, got {self.user_antennas!r}")
        self.user_antennas = int(self.user_antennas)
        _require(_is_int_like(self.tau) and self.tau >= 1,
                 f"tau must be a positive integer blocklength, got {self.tau!r}")
        self.tau = int(self.tau)
        _require(isinstance(self.epsilon, (int, float)) and 0.0 < self.epsilon <= 0.5,
                 f"epsilon must lie in (0, 0.5], got {self.epsilon!r}")
        self.epsilon = float(self.epsilon)
        _require(isinstance(self.sigma_e2, (int, float)) and 0.0 <= self.sigma_e2 < 1.0,
                 f"sigma_e2 must lie in [0, 1), got {self.sigma_e2!r}")
        self.sigma_e2 = float(self.sigma_e2)

        area = math.pi * self.radius ** 2
        self._resolve_pair("ap_density", "expected_ap_count",
                           lambda lam: lam * area, lambda en: en / area)
        _require(self.ap_density >= 0.0,
                 f"ap_density must be nonnegative, got {self.ap_density!r}")

        m = self.user_antennas
        self._resolve_pair("antenna_ratio", "ap_antennas",
                           lambda w: w * m, lambda l: l / m)
        l_exact = self.antenna_ratio * m
        _require(abs(l_exact - round(l_exact)) <= 1e-9 * max(1.0, abs(l_exact)),
                 f"antenna_ratio * user_antennas must be an integer antenna "
                 f"count, got {self.antenna_ratio!r} * {m} = {l_exact!r}")
        self.ap_antennas = int(round(l_exact))
        _require(self.ap_antennas >= 1,
                 f"ap_antennas must be a positive integer, got {self.ap_antennas!r}")

        self._resolve_pair("rho", "gamma_db",
                           lambda rho: 10.0 * math.log10(rho / self.radius ** self.alpha),
                           lambda g: 10.0 ** (g / 10.0) * self.radius ** self.alpha)
        _require(self.rho > 0.0, f"rho must be positive, got {self.rho!r}")

    def _resolve_pair(self, name_a, name_b, a_to_b, b_to_a):
        a = getattr(self, name_a)
        b = getattr(self, name_b)
        _require(not (a is None and b is None),
                 f"one of {name_a} or {name_b} must be given")
        _require(a is None or b is None,
                 f"{name_a} and {name_b} are redundant; give exactly one")
        if a is None:
            _require(isinstance(b, (int, float)) and math.isfinite(b),
                     f"{name_b} must be a finite number, got {b!r}")
            setattr(self, name_b, float(b))
            setattr(self, name_a, float(b_to_a(float(b))))
        else:
            _require(isinstance(a, (int, float)) and math.isfinite(a),
                     f"{name_a} must be a finite number, got {a!r}")
            setattr(self, name_a, float(a))
            setattr(self, name_b, float(a_to_b(float(a))))

    @classmethod
    def from_mapping(cls, mapping) -> "SystemConfig":
        """Build a config from a dict that may use symbol-style keys."""
        known = {f.name for f in fields(cls)}
        kwargs = {}
        for key, value in mapping.items():
            name = _KEY_ALIASES.get(key, key)
            if name not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            if name in kwargs:
                raise ConfigError(f"configuration key {key!r} duplicates {name!r}")
            kwargs[name] = value
        return cls(**kwargs)


@dataclass(frozen=True)
class DerivedParams:
    """Quantities the closed forms consume, all precomputed.

    theta is the mean single-access-point channel gain under the bounded
    path loss model, beta the effective inverse-SNR scale entering every
    Laplace-domain expression.
    """

    theta: float
    beta: float
    lam: float
    rho: float
    omega: float
    en: float
    m: int
    l: int
    sigma_e2: float
    radius: float
    alpha: float
    gamma_db: float


def mean_single_ap_gain(radius: float, alpha: float) -> float:
    """Average of min(1, d^-alpha) over a uniformly random point in the disk."""
    if radius <= 1.0 or alpha <= 2.0:
        raise ConfigError(
            f"mean gain requires radius > 1 and alpha > 2, got {radius}, {alpha}")
    return (alpha - 2.0 * radius ** (2.0 - alpha)) / ((alpha - 2.0) * radius ** 2)


def derive_params(cfg: SystemConfig) -> DerivedParams:
    theta = mean_single_ap_gain(cfg.radius, cfg.alpha)
    num = 1.0 + cfg.rho * cfg.sigma_e2 * theta
    den = cfg.rho * cfg.antenna_ratio * (1.0 - cfg.sigma_e2)
    return DerivedParams(
        theta=theta,
        beta=num / den,
        lam=cfg.ap_density,
        rho=cfg.rho,
        omega=cfg.antenna_ratio,
        en=cfg.expected_ap_count,
        m=cfg.user_antennas,
        l=cfg.ap_antennas,
        sigma_e2=cfg.sigma_e2,
        radius=cfg.radius,
        alpha=cfg.alpha,
        gamma_db=cfg.gamma_db,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Outcome of the closed-form validity check for the heavy-tail series.

    The series representation converges when beta exceeds the linear
    coefficient of the approximate log Laplace transform, equivalently when
    beta / lam > 2 pi R^(2-alpha) / (alpha - 2). ratio is beta divided by
    that critical value; margin = ratio - 1 is positive when usable.
    """

    passed: bool
    margin: float
    threshold: float
    ratio: float


def check_convergence(p: DerivedParams) -> ConvergenceReport:
    threshold = 2.0 * math.pi * p.lam * p.radius ** (2.0 - p.alpha) / (p.alpha - 2.0)
    if p.lam == 0.0:
        return ConvergenceReport(True, math.inf, 0.0, math.inf)
    ratio = p.beta / threshold
    return ConvergenceReport(ratio > 1.0, ratio - 1.0, threshold, ratio)
