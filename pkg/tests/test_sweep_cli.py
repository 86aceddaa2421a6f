"""Sweep engine and command line checks.

Sweeps are exercised on single points against the library calls they must
reproduce bit-for-bit, plus the flag vocabulary; the command line is driven
in-process through main() with one subprocess smoke test.
"""

import csv
import json
import math
import subprocess
import sys

import pytest

from cfrate.cli import main
from cfrate.config import SystemConfig, derive_params
from cfrate.errors import ConfigError
from cfrate.laplace import cached_exact
from cfrate.moments import expected_dispersion_with_error
from cfrate.rate import average_rate, block_error_probability
from cfrate.sweep import (CSV_HEADER, FIGURES, SweepSpec, figure_spec,
                          run_figure, run_sweep)

FIXED = {"E_N": 8.0, "omega": 8.0, "gamma_db": -20.0}


def one_point(quantities, methods, fixed=None, **kw):
    return SweepSpec(axis="M", values=[2.0], fixed=dict(fixed or FIXED),
                     quantities=quantities, methods=methods, **kw)


def desk_params(**overrides):
    kw = dict(expected_ap_count=8.0, antenna_ratio=8.0, gamma_db=-20.0,
              user_antennas=2)
    kw.update(overrides)
    return derive_params(SystemConfig(**kw))


def test_spec_round_trip():
    spec = one_point(["EV", "rate"], ["integral_exact"], trials=500, seed=4)
    again = SweepSpec.from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict()


def test_spec_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"axis": "M", "values": [1], "bogus": 2})


def test_spec_requires_axis_and_values():
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"values": [1]})
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"axis": "M"})


@pytest.mark.parametrize("bad", [
    dict(quantities=["XX"]),
    dict(quantities=["EV@sigma_e2"]),
    dict(quantities=["EV@sigma_e2=zero"]),
    dict(quantities=[]),
    dict(methods=["typo"]),
    dict(methods=[]),
    dict(trials=1),
    dict(inner_small_scale=0),
    dict(values=[]),
    dict(values=[math.inf]),
])
def test_spec_validation(bad):
    kw = dict(axis="M", values=[2.0], quantities=["EV"],
              methods=["integral_exact"])
    kw.update(bad)
    with pytest.raises(ConfigError):
        SweepSpec(**kw)


def test_single_point_matches_library_call():
    spec = one_point(["EV"], ["integral_exact"])
    rows = run_sweep(spec).rows
    assert len(rows) == 1
    p = desk_params()
    want, err = expected_dispersion_with_error(
        p, cached_exact(p.lam, p.radius, p.alpha))
    assert rows[0].value == pytest.approx(want, abs=1e-12)
    assert rows[0].uncertainty == pytest.approx(err, rel=1e-9)
    assert rows[0].flag == ""
    assert rows[0].axis == "M" and rows[0].axis_value == 2.0


def test_rate_row_matches_library_call():
    spec = one_point(["rate"], ["integral_exact"])
    rows = run_sweep(spec).rows
    p = desk_params()
    lx = cached_exact(p.lam, p.radius, p.alpha)
    want = average_rate(p, lx, tau=100, epsilon=1e-7).rate
    assert rows[0].value == pytest.approx(want, abs=1e-12)


def test_bep_row_matches_library_call():
    spec = one_point(["bep"], ["integral_exact"], rate_per_antenna=3.0)
    rows = run_sweep(spec).rows
    p = desk_params()
    lx = cached_exact(p.lam, p.radius, p.alpha)
    want = block_error_probability(p, lx, tau=100, rate_per_antenna=3.0)
    assert rows[0].value == pytest.approx(want, rel=1e-12)
    assert 0.0 < rows[0].value < 1.0


def test_bep_requires_target_rate():
    spec = one_point(["bep"], ["integral_exact"])
    with pytest.raises(ConfigError):
        run_sweep(spec)


def test_approx_and_simplified_methods_agree():
    spec = one_point(["EV", "VarV"], ["integral_approx", "simplified"])
    rows = run_sweep(spec).rows
    by = {(r.quantity, r.method): r for r in rows}
    for q in ("EV", "VarV"):
        a = by[(q, "integral_approx")].value
        s = by[(q, "simplified")].value
        assert s == pytest.approx(a, rel=1e-9)


def test_antenna_scaling_collapses_to_one_integral():
    # per-antenna moments are independent of M, so the engine reuses one
    # cached integral across the axis and the scaling is exact
    spec = SweepSpec(axis="M", values=[1.0, 4.0], fixed=dict(FIXED),
                     quantities=["EV", "VarC"], methods=["integral_exact"])
    by = {(r.quantity, r.axis_value): r for r in run_sweep(spec).rows}
    assert by[("EV", 4.0)].value == 4.0 * by[("EV", 1.0)].value
    assert by[("VarC", 4.0)].value == 16.0 * by[("VarC", 1.0)].value


def test_quantity_override_changes_point():
    spec = one_point(["EV", "EV@sigma_e2=0.1"], ["integral_exact"])
    rows = run_sweep(spec).rows
    assert rows[0].value != rows[1].value


def test_unsupported_flag():
    spec = one_point(["EC"], ["simplified"])
    rows = run_sweep(spec).rows
    assert rows[0].flag == "unsupported"
    assert math.isnan(rows[0].value)


def test_skipped_flag_on_constraint_violation():
    fixed = dict(FIXED, E_N=16.0)
    spec = one_point(["EV"], ["integral_approx", "integral_exact"],
                     fixed=fixed)
    by = {r.method: r for r in run_sweep(spec).rows}
    assert by["integral_approx"].flag == "skipped"
    assert math.isnan(by["integral_approx"].value)
    assert by["integral_exact"].flag == ""
    assert math.isfinite(by["integral_exact"].value)


def test_below_zero_flag():
    fixed = dict(FIXED, gamma_db=-40.0, tau=10, epsilon=1e-9)
    spec = one_point(["rate"], ["integral_exact"], fixed=fixed)
    rows = run_sweep(spec).rows
    assert rows[0].value < 0.0
    assert rows[0].flag == "below_zero"


def test_mc_rows_deterministic_and_seed_sensitive():
    spec = one_point(["EV"], ["mc_large_scale"], trials=4000, seed=0)
    a = run_sweep(spec).rows[0]
    b = run_sweep(spec).rows[0]
    assert a == b
    moved = run_sweep(one_point(["EV"], ["mc_large_scale"], trials=4000,
                                seed=1)).rows[0]
    assert moved.value != a.value
    gap = abs(moved.value - a.value)
    assert gap <= 6.0 * math.hypot(a.uncertainty, moved.uncertainty)


def test_mc_matches_closed_form():
    spec = one_point(["EV"], ["integral_exact", "mc_large_scale"],
                     trials=20000, seed=2)
    by = {r.method: r for r in run_sweep(spec).rows}
    mc = by["mc_large_scale"]
    assert abs(mc.value - by["integral_exact"].value) <= 4.0 * mc.uncertainty


def test_csv_and_metadata_outputs(tmp_path):
    spec = one_point(["EV"], ["integral_exact", "simplified"])
    result = run_sweep(spec)
    out = tmp_path / "sweep.csv"
    result.write_csv(str(out))
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + len(result.rows)
    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    assert SweepSpec.from_dict(meta["spec"]).to_dict() == spec.to_dict()
    assert "uncertainty_semantics" in meta


def test_figure_registry_covers_ids_one_to_eight():
    assert sorted(FIGURES) == [1, 2, 3, 4, 5, 6, 7, 8]
    for fid in FIGURES:
        spec = figure_spec(fid, methods=["integral_exact"])
        assert spec.values and spec.quantities


def test_figure_spec_rejects_unknown_id():
    with pytest.raises(ConfigError):
        figure_spec(9)
    with pytest.raises(ConfigError):
        figure_spec(0)


def test_figure_spec_applies_overrides():
    spec = figure_spec(2, methods=["simplified"], trials=500, seed=3,
                       overrides={"omega": 16.0})
    assert spec.fixed["antenna_ratio"] == 16.0
    assert spec.trials == 500 and spec.seed == 3
    assert spec.methods == ["simplified"]


def test_run_figure_metadata():
    result = run_figure(2, methods=["simplified"], trials=500)
    assert result.metadata["figure"] == 2
    assert "description" in result.metadata
    assert len(result.rows) == 6 * 3


def test_cli_figure_list(capsys):
    assert main(["figure", "--list"]) == 0
    out = capsys.readouterr().out
    for fid in range(1, 9):
        assert f"{fid}: " in out


def test_cli_figure_dataset(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    code = main(["figure", "--id", "2", "--methods", "simplified",
                 "--out", str(out), "--no-plot"])
    assert code == 0
    assert out.exists()
    assert not (tmp_path / "fig2.png").exists()
    meta = json.loads((tmp_path / "fig2.csv.meta.json").read_text())
    assert meta["figure"] == 2
    assert "wrote" in capsys.readouterr().out
    with open(out, newline="") as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == CSV_HEADER


def test_cli_figure_set_override(tmp_path):
    out = tmp_path / "fig2.csv"
    code = main(["figure", "--id", "2", "--methods", "simplified",
                 "--set", "omega=16", "--out", str(out), "--no-plot"])
    assert code == 0
    meta = json.loads((tmp_path / "fig2.csv.meta.json").read_text())
    assert meta["spec"]["fixed"]["antenna_ratio"] == 16.0


def test_cli_figure_renders_plot(tmp_path):
    out = tmp_path / "fig2.csv"
    code = main(["figure", "--id", "2", "--methods", "simplified",
                 "--out", str(out)])
    assert code == 0
    png = tmp_path / "fig2.png"
    assert png.exists() and png.stat().st_size > 1000


def test_cli_sweep_round_trip(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "axis": "M", "values": [1, 2], "fixed": FIXED,
        "quantities": ["EV"], "methods": ["integral_exact"],
    }))
    out = tmp_path / "custom.csv"
    code = main(["sweep", "--spec", str(spec_path), "--out", str(out),
                 "--no-plot"])
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == 3


def test_cli_error_exits(tmp_path, capsys):
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    assert main(["sweep", "--spec", str(bad_json), "--no-plot"]) == 2
    assert main(["sweep", "--spec", str(tmp_path / "missing.json"),
                 "--no-plot"]) == 2
    assert main(["figure", "--id", "9", "--no-plot"]) == 2
    assert main(["figure", "--no-plot"]) == 2
    assert main(["figure", "--id", "2", "--methods", "typo",
                 "--no-plot"]) == 2
    assert main(["figure", "--id", "2", "--set", "omega", "--no-plot"]) == 2
    capsys.readouterr()


def test_cli_check_single_criterion(capsys):
    assert main(["check", "--only", "5"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] 5:" in out
    assert "1/1 passed" in out


def test_cli_subprocess_smoke():
    proc = subprocess.run([sys.executable, "-m", "cfrate.cli", "figure",
                           "--list"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "1: " in proc.stdout
