"""Command line entry point.

Three subcommands:

    analyze figure --id 3            standard figure dataset -> CSV (+ PNG)
    analyze sweep --spec sweep.json  custom sweep described in JSON
    analyze check                    self-verification suite

Report paths write the delimited dataset, a .meta.json sidecar recording
the resolved sweep, and a rendered PNG next to the CSV unless --no-plot is
given. Exit status is 0 on success, 1 when an internal consistency check
trips or the verification suite has unexpected failures, 2 on bad usage.
"""

import argparse
import json
import sys

from .checks import format_results, run_all
from .errors import CfrateError, ConfigError, InternalConsistencyError
from .sweep import (FIGURES, METHODS, SweepSpec, figure_spec, run_figure,
                    run_sweep)


def _parse_methods(raw):
    if raw is None:
        return None
    methods = [m.strip() for m in raw.split(",") if m.strip()]
    if not methods:
        raise ConfigError("--methods must name at least one method")
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; expected one of {METHODS}")
    return methods


def _parse_sets(pairs):
    overrides = {}
    for pair in pairs or ():
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        try:
            overrides[key] = float(raw)
        except ValueError:
            raise ConfigError(
                f"--set value for {key!r} must be numeric, got {raw!r}")
    return overrides


def _write_outputs(result, out_path, plot, title):
    result.write_csv(out_path)
    written = [out_path, out_path + ".meta.json"]
    if plot:
        from .plotting import render_figure
        png_path = (out_path[:-4] if out_path.endswith(".csv") else out_path) + ".png"
        render_figure(result, png_path, title=title)
        written.append(png_path)
    flags = {}
    for row in result.rows:
        if row.flag:
            flags[row.flag] = flags.get(row.flag, 0) + 1
    note = "".join(f", {n} {f}" for f, n in sorted(flags.items()))
    print(f"wrote {len(result.rows)} rows to {', '.join(written)}{note}")


def _cmd_figure(args):
    if args.list:
        for fid in sorted(FIGURES):
            print(f"{fid}: {FIGURES[fid]['description']}")
        return 0
    if args.id is None:
        raise ConfigError("figure requires --id (or --list)")
    result = run_figure(args.id, methods=_parse_methods(args.methods),
                        trials=args.trials, seed=args.seed,
                        overrides=_parse_sets(args.set))
    out = args.out or f"figure{args.id}.csv"
    _write_outputs(result, out, not args.no_plot,
                   FIGURES[args.id]["description"])
    return 0


def _cmd_sweep(args):
    with open(args.spec) as fh:
        spec = SweepSpec.from_dict(json.load(fh))
    result = run_sweep(spec)
    out = args.out or "sweep.csv"
    _write_outputs(result, out, not args.no_plot, None)
    return 0


def _cmd_check(args):
    only = None
    if args.only:
        only = [c.strip() for c in args.only.split(",") if c.strip()]
    results = run_all(only=only)
    print(format_results(results))
    return 0 if all(r.ok for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="analyze",
        description="Finite-blocklength rate statistics for dense uplink "
                    "deployments: figure datasets, custom sweeps, and a "
                    "self-verification suite.")
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="generate a standard figure dataset")
    fig.add_argument("--id", type=int, help="figure number (1-8)")
    fig.add_argument("--list", action="store_true",
                     help="list available figures and exit")
    fig.add_argument("--out", help="output CSV path (default figureN.csv)")
    fig.add_argument("--methods",
                     help="comma-separated methods (default integral_exact,"
                          "mc_large_scale)")
    fig.add_argument("--trials", type=int, help="Monte Carlo deployments")
    fig.add_argument("--seed", type=int, help="Monte Carlo seed")
    fig.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a fixed parameter (repeatable)")
    fig.add_argument("--no-plot", action="store_true",
                     help="skip rendering the PNG next to the CSV")
    fig.set_defaults(fn=_cmd_figure)

    swp = sub.add_parser("sweep", help="run a sweep described by a JSON spec")
    swp.add_argument("--spec", required=True, help="path to the JSON sweep spec")
    swp.add_argument("--out", help="output CSV path (default sweep.csv)")
    swp.add_argument("--no-plot", action="store_true",
                     help="skip rendering the PNG next to the CSV")
    swp.set_defaults(fn=_cmd_sweep)

    chk = sub.add_parser("check", help="run the self-verification suite")
    chk.add_argument("--only", help="comma-separated criterion ids to run")
    chk.set_defaults(fn=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return 1
    except (CfrateError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
