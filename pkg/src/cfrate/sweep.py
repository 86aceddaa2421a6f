"""Parameter sweeps and the eight standard figure datasets.

A sweep walks one axis (antenna count, deployment density, SNR,
blocklength, ...) and evaluates a set of quantities with one or more
methods per point, emitting rows of (axis_value, quantity, method, value,
uncertainty, flag). Curve families are encoded in the quantity string:
"EV@sigma_e2=0.05" evaluates EV with that override applied on top of the
point's configuration, so one sweep carries a whole figure.

Closed-form values are cached per (quantity, method, beta, lam, R, alpha)
after stripping the antenna count, since capacity and dispersion scale as
M and their variances as M^2; a figure's worth of curves often collapses
to a handful of distinct integrals. Monte Carlo estimates are cached per
full parameter set.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .config import _KEY_ALIASES, SystemConfig, derive_params
from .errors import (ConfigError, ConstraintError, DegenerateDispersionError,
                     DivergenceError)
from .moments import (MomentMethod, expected_capacity_with_error,
                      expected_dispersion_simplified_with_error,
                      expected_dispersion_with_error, evaluator_for,
                      var_capacity_with_error,
                      var_dispersion_simplified_with_error,
                      var_dispersion_with_error)
from .montecarlo import mc_moments
from .specfun import gaussian_q, gaussian_q_inv

_LN2 = math.log(2.0)

QUANTITIES = ("EV", "VarV", "EC", "VarC", "rate", "normalized_rate", "bep")
METHODS = ("integral_exact", "integral_approx", "simplified",
           "mc_large_scale", "mc_full")
_SIMPLIFIED_OK = ("EV", "VarV")

CSV_HEADER = ("axis", "axis_value", "quantity", "method", "value",
              "uncertainty", "flag")


def _canonical(key: str) -> str:
    return _KEY_ALIASES.get(key, key)


def _parse_quantity(q: str):
    """Split "EV@sigma_e2=0.05@E_N=64" into base and override mapping."""
    parts = q.split("@")
    base = parts[0]
    if base not in QUANTITIES:
        raise ConfigError(f"unknown quantity {base!r} in {q!r}; "
                          f"expected one of {QUANTITIES}")
    overrides = {}
    for part in parts[1:]:
        if "=" not in part:
            raise ConfigError(f"malformed quantity override {part!r} in {q!r}")
        key, _, raw = part.partition("=")
        try:
            overrides[_canonical(key)] = float(raw)
        except ValueError:
            raise ConfigError(f"non-numeric override value {raw!r} in {q!r}")
    return base, overrides


@dataclass
class SweepSpec:
    """Declarative description of one sweep; mirrors the JSON schema."""

    axis: str
    values: list
    fixed: dict = field(default_factory=dict)
    quantities: list = field(default_factory=lambda: ["EV"])
    methods: list = field(default_factory=lambda: ["integral_exact", "mc_large_scale"])
    trials: int = 20000
    inner_small_scale: int = 50
    seed: int = 0
    rate_per_antenna: Optional[float] = None

    def __post_init__(self):
        if not isinstance(self.axis, str) or not self.axis:
            raise ConfigError(f"axis must be a nonempty string, got {self.axis!r}")
        vals = [float(v) for v in self.values]
        if not vals or not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"axis values must be finite and nonempty, got {self.values!r}")
        self.values = vals
        if not self.quantities:
            raise ConfigError("quantities must be nonempty")
        for q in self.quantities:
            _parse_quantity(q)
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
        if not self.methods:
            raise ConfigError("methods must be nonempty")
        if self.trials < 2:
            raise ConfigError(f"trials must be >= 2, got {self.trials}")
        if self.inner_small_scale < 1:
            raise ConfigError(f"inner_small_scale must be >= 1, got {self.inner_small_scale}")

    def to_dict(self) -> dict:
        return {
            "axis": self.axis, "values": list(self.values),
            "fixed": dict(self.fixed), "quantities": list(self.quantities),
            "methods": list(self.methods), "trials": self.trials,
            "inner_small_scale": self.inner_small_scale, "seed": self.seed,
            "rate_per_antenna": self.rate_per_antenna,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        known = {"axis", "values", "fixed", "quantities", "methods", "trials",
                 "inner_small_scale", "seed", "rate_per_antenna"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown sweep spec keys: {sorted(extra)}")
        if "axis" not in d or "values" not in d:
            raise ConfigError("sweep spec requires 'axis' and 'values'")
        kwargs = {k: d[k] for k in known if k in d}
        kwargs["trials"] = int(kwargs.get("trials", 20000))
        kwargs["inner_small_scale"] = int(kwargs.get("inner_small_scale", 50))
        kwargs["seed"] = int(kwargs.get("seed", 0))
        return cls(**kwargs)


@dataclass(frozen=True)
class SweepRow:
    axis: str
    axis_value: float
    quantity: str
    method: str
    value: float
    uncertainty: float
    flag: str  # "", "skipped", "unsupported", or "below_zero"


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list
    metadata: dict

    def write_csv(self, path: str, with_metadata: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in self.rows:
                writer.writerow([
                    r.axis, f"{r.axis_value:.12g}", r.quantity, r.method,
                    f"{r.value:.12g}", f"{r.uncertainty:.6g}", r.flag,
                ])
        if with_metadata:
            with open(path + ".meta.json", "w") as fh:
                json.dump(self.metadata, fh, indent=2, sort_keys=True)
                fh.write("\n")


class _Engine:
    """Evaluates sweep cells with cross-point caching."""

    def __init__(self, spec: SweepSpec):
        self.spec = spec
        self._closed_cache = {}
        self._mc_cache = {}

    def _point(self, axis_value: float, overrides: dict):
        merged = {_canonical(k): v for k, v in self.spec.fixed.items()}
        merged[_canonical(self.spec.axis)] = axis_value
        merged.update(overrides)
        rpa = merged.pop("rate_per_antenna", self.spec.rate_per_antenna)
        cfg = SystemConfig.from_mapping(merged)
        return cfg, derive_params(cfg), rpa

    def _closed_normalized(self, kind: str, method: MomentMethod, p):
        """Per-antenna moment (value, error); EV and EC scale by M,
        variances by M^2, so the cache key drops the antenna count."""
        key = (kind, method.value, p.beta, p.lam, p.radius, p.alpha)
        got = self._closed_cache.get(key)
        if got is not None:
            return got
        if method == MomentMethod.SIMPLIFIED:
            if kind == "EV":
                v, e = expected_dispersion_simplified_with_error(p)
                out = (v / p.m, e / p.m)
            else:
                v, e = var_dispersion_simplified_with_error(p)
                out = (v / p.m ** 2, e / p.m ** 2)
        else:
            lx = evaluator_for(p, method)
            if kind == "EV":
                v, e = expected_dispersion_with_error(p, lx)
                out = (v / p.m, e / p.m)
            elif kind == "VarV":
                v, e = var_dispersion_with_error(p, lx)
                out = (v / p.m ** 2, e / p.m ** 2)
            elif kind == "EC":
                v, e = expected_capacity_with_error(p, lx)
                out = (v / p.m, e / p.m)
            else:
                v, e = var_capacity_with_error(p, lx)
                out = (v / p.m ** 2, e / p.m ** 2)
        self._closed_cache[key] = out
        return out

    def _mc(self, method: str, p):
        mode = "full" if method == "mc_full" else "large_scale_only"
        inner = self.spec.inner_small_scale if mode == "full" else 1
        key = (mode, p.beta, p.lam, p.radius, p.alpha, p.m, p.l,
               p.sigma_e2, p.rho, self.spec.trials, inner, self.spec.seed)
        got = self._mc_cache.get(key)
        if got is None:
            got = mc_moments(p, trials=self.spec.trials,
                             inner_small_scale=inner, mode=mode,
                             seed=self.spec.seed)
            self._mc_cache[key] = got
        return got

    def _closed_cell(self, base: str, method: MomentMethod, cfg, p, rpa):
        if base in ("EV", "EC"):
            v, e = self._closed_normalized(base, method, p)
            return v * p.m, e * p.m, ""
        if base in ("VarV", "VarC"):
            v, e = self._closed_normalized(base, method, p)
            return v * p.m ** 2, e * p.m ** 2, ""
        ec_n, ec_e = self._closed_normalized("EC", method, p)
        ev_n, ev_e = self._closed_normalized("EV", method, p)
        ec, ev = ec_n * p.m, ev_n * p.m
        ec_err, ev_err = ec_e * p.m, ev_e * p.m
        return self._rate_family(base, cfg, p, rpa, ec, ev, ec_err, ev_err)

    def _mc_cell(self, base: str, method: str, cfg, p, rpa):
        est = self._mc(method, p)
        direct = {
            "EV": (est.mean_dispersion, est.se_mean_dispersion),
            "VarV": (est.var_dispersion, est.se_var_dispersion),
            "EC": (est.mean_capacity, est.se_mean_capacity),
            "VarC": (est.var_capacity, est.se_var_capacity),
        }
        if base in direct:
            v, e = direct[base]
            return v, e, ""
        return self._rate_family(base, cfg, p, rpa, est.mean_capacity,
                                 est.mean_dispersion, est.se_mean_capacity,
                                 est.se_mean_dispersion)

    def _rate_family(self, base, cfg, p, rpa, ec, ev, ec_err, ev_err):
        """rate / normalized_rate / bep from capacity and dispersion values."""
        if base == "bep":
            if rpa is None:
                raise ConfigError(
                    "bep requires rate_per_antenna (spec field or quantity override)")
            if ev / p.m < 1e-12:
                raise DegenerateDispersionError(
                    "dispersion is numerically zero; error probability undefined")
            arg = _LN2 * (ec - rpa * p.m) * math.sqrt(cfg.tau / ev)
            value = gaussian_q(arg)
            darg = _LN2 * math.sqrt(cfg.tau / ev) * ec_err \
                + abs(arg) / (2.0 * ev) * ev_err
            err = math.exp(-0.5 * arg * arg) / math.sqrt(2 * math.pi) * darg
            return value, err, ""
        qinv = gaussian_q_inv(cfg.epsilon)
        if ev < 0.0:
            ev = 0.0  # MC noise can leave a tiny negative mean here
        rate = ec - math.sqrt(ev / cfg.tau) * qinv / _LN2
        err = ec_err
        if ev > 0.0:
            err += qinv / (2.0 * math.sqrt(ev * cfg.tau)) / _LN2 * ev_err
        if base == "normalized_rate":
            rate, err = rate / p.m, err / p.m
        flag = "below_zero" if rate < 0.0 else ""
        return rate, err, flag

    def cell(self, axis_value: float, quantity: str, method: str) -> SweepRow:
        base, overrides = _parse_quantity(quantity)
        flag = ""
        value = math.nan
        err = math.nan
        if method == "simplified" and base not in _SIMPLIFIED_OK:
            flag = "unsupported"
        else:
            try:
                cfg, p, rpa = self._point(axis_value, overrides)
                if method in ("mc_large_scale", "mc_full"):
                    value, err, flag = self._mc_cell(base, method, cfg, p, rpa)
                else:
                    mm = MomentMethod(method)
                    value, err, flag = self._closed_cell(base, mm, cfg, p, rpa)
            except (ConstraintError, DegenerateDispersionError, DivergenceError):
                flag = "skipped"
        return SweepRow(self.spec.axis, float(axis_value), quantity, method,
                        value, err, flag)


def run_sweep(spec: SweepSpec, metadata_extra: Optional[dict] = None) -> SweepResult:
    """Evaluate every (axis value, quantity, method) cell of the spec."""
    engine = _Engine(spec)
    rows = []
    for axis_value in spec.values:
        for quantity in spec.quantities:
            for method in spec.methods:
                rows.append(engine.cell(axis_value, quantity, method))
    rows.sort(key=lambda r: (r.axis_value, r.quantity, r.method))
    metadata = {
        "spec": spec.to_dict(),
        "rate_semantics": "achievable-rate lower bound",
        "uncertainty_semantics": {
            "mc_large_scale": "batch-means standard error",
            "mc_full": "batch-means standard error",
            "integral_exact": "quadrature error bound",
            "integral_approx": "quadrature error bound",
            "simplified": "series truncation bound",
        },
    }
    if metadata_extra:
        metadata.update(metadata_extra)
    return SweepResult(spec=spec, rows=rows, metadata=metadata)


_COMMON = {"R": 50.0, "gamma_db": -20.0, "E_N": 8.0, "omega": 8.0,
           "M": 2.0, "tau": 100, "epsilon": 1e-7, "sigma_e2": 0.0}


def _fig(axis, values, quantities, description, rate_per_antenna=None, **fixed_over):
    fixed = dict(_COMMON)
    fixed.update(fixed_over)
    fixed = {k: v for k, v in fixed.items()
             if _canonical(k) != _canonical(axis)}
    return {"axis": axis, "values": values, "fixed": fixed,
            "quantities": quantities, "description": description,
            "rate_per_antenna": rate_per_antenna}


_SIGMAS = (0, 0.05, 0.1)

FIGURES = {
    1: _fig("M", [1, 2, 4, 8],
            [f"EV@sigma_e2={s}" for s in _SIGMAS]
            + [f"EV@sigma_e2={s}@E_N=64" for s in _SIGMAS],
            "Expected dispersion vs antenna count, estimation error and "
            "density curves"),
    2: _fig("E_N", [2, 4, 8, 16, 32, 64],
            [f"VarV@sigma_e2={s}" for s in _SIGMAS],
            "Dispersion variance vs expected access point count"),
    3: _fig("M", [1, 2, 4, 8],
            [f"EC@sigma_e2={s}@omega=2" for s in _SIGMAS]
            + [f"EC@sigma_e2={s}@omega=8" for s in _SIGMAS],
            "Expected capacity vs antenna count, antenna ratio curves"),
    4: _fig("E_N", [2, 4, 8, 16, 32, 64],
            [f"VarC@sigma_e2={s}" for s in _SIGMAS],
            "Capacity variance vs expected access point count"),
    5: _fig("M", [1, 2, 4, 8],
            [f"rate@sigma_e2={s}" for s in _SIGMAS],
            "Average achievable rate vs antenna count at blocklength 30",
            tau=30),
    6: _fig("gamma_db", list(range(-20, 31, 5)),
            [f"normalized_rate@sigma_e2={s}" for s in _SIGMAS],
            "Normalized rate vs boundary SNR at blocklength 10",
            tau=10),
    7: _fig("tau", [10, 20, 50, 100, 200],
            [f"normalized_rate@sigma_e2={s}@epsilon={e}"
             for s in (0, 0.1) for e in (1e-9, 1e-7, 1e-5, 1e-3, 1e-1)],
            "Normalized rate vs blocklength over error-target curves",
            M=1.0, gamma_db=0.0),
    8: _fig("M", [1, 2, 4, 8],
            [f"bep@sigma_e2={s}" for s in _SIGMAS],
            "Block error probability vs antenna count at 4 bits per antenna",
            rate_per_antenna=4.0, tau=30),
}


def figure_spec(fig_id: int, methods=None, trials=None, seed=None,
                overrides=None) -> SweepSpec:
    """SweepSpec for one of the standard figures, with optional overrides."""
    if fig_id not in FIGURES:
        raise ConfigError(f"figure id must be in 1..8, got {fig_id!r}")
    d = FIGURES[fig_id]
    fixed = dict(d["fixed"])
    if overrides:
        for k, v in overrides.items():
            fixed[_canonical(k)] = v
    return SweepSpec(
        axis=d["axis"], values=list(d["values"]), fixed=fixed,
        quantities=list(d["quantities"]),
        methods=list(methods) if methods else ["integral_exact", "mc_large_scale"],
        trials=int(trials) if trials else 20000,
        seed=int(seed) if seed is not None else 0,
        rate_per_antenna=d["rate_per_antenna"],
    )


def run_figure(fig_id: int, methods=None, trials=None, seed=None,
               overrides=None) -> SweepResult:
    """Standard figure dataset as a SweepResult."""
    spec = figure_spec(fig_id, methods=methods, trials=trials, seed=seed,
                       overrides=overrides)
    return run_sweep(spec, metadata_extra={
        "figure": fig_id, "description": FIGURES[fig_id]["description"],
        "note": "axis ranges and fixed parameters are package choices, "
                "declared here",
    })
