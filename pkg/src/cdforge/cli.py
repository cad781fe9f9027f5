"""Command line entry point.

    cdforge <subcommand> [--config path] [--out dir] [--threads k]
            [--override key=value ...]

Subcommands: kz-sweep | state-prep | solve-aux | resources.  Exit codes:
0 success, 2 config error, 3 numeric/convergence error, 4 partial
failure (some sweep cells flagged).
"""
from __future__ import annotations

import argparse
import json
import pathlib
import sys

from .errors import CdforgeError, ConfigurationError
from .harness import (
    EXPERIMENTS,
    load_config,
    resolve_config,
    run_kz_sweep,
    run_resources,
    run_solve_aux,
    run_state_prep,
)

_SUBCOMMANDS = {
    "kz-sweep": "kz_sweep",
    "state-prep": "state_prep",
    "solve-aux": "solve_aux",
    "resources": "resources",
}


def _apply_override(config: dict, spec: str):
    if "=" not in spec:
        raise ConfigurationError(f"override {spec!r} is not of the form key=value")
    key, raw = spec.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"override path {key!r} crosses a non-object value")
    node[parts[-1]] = value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdforge",
        description="Counterdiabatic driving experiments on a finite Ising chain.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=pathlib.Path, default=None,
                       help="JSON config file (defaults apply when omitted)")
        p.add_argument("--out", type=pathlib.Path, default=pathlib.Path("."),
                       help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config entry (dotted path, JSON value)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    experiment = _SUBCOMMANDS[args.subcommand]
    try:
        if args.config is not None:
            with open(args.config, encoding="utf-8") as fh:
                user = json.load(fh)
        else:
            user = {}
        user.setdefault("experiment", experiment)
        if user["experiment"] != experiment:
            raise ConfigurationError(
                f"config is for {user['experiment']!r} but subcommand asked for {experiment!r}"
            )
        for spec in args.override:
            _apply_override(user, spec)
        config = resolve_config(user)
    except (ConfigurationError, json.JSONDecodeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    basename = config["output"]["basename"]
    partial = False
    try:
        if experiment == "kz_sweep":
            table = run_kz_sweep(config, threads=args.threads)
            path = out_dir / f"{basename}.csv"
            table.write_csv(path)
            flagged = [r for r in table.rows if r[-1]]
            partial = bool(flagged)
            print(f"wrote {path} ({len(table.rows)} rows, {len(flagged)} flagged)")
        elif experiment == "state_prep":
            main_table, amp_table = run_state_prep(config, threads=args.threads)
            path = out_dir / f"{basename}_timeseries.csv"
            main_table.write_csv(path)
            print(f"wrote {path} ({len(main_table.rows)} rows)")
            if amp_table is not None:
                apath = out_dir / f"{basename}_amplitudes.csv"
                amp_table.write_csv(apath)
                print(f"wrote {apath} ({len(amp_table.rows)} rows)")
            partial = bool(main_table.metadata.get("errors"))
        elif experiment == "solve_aux":
            table = run_solve_aux(config)
            path = out_dir / f"{basename}.csv"
            table.write_csv(path)
            print(f"wrote {path} (residual {table.metadata['residual']:.6e}, "
                  f"rank {table.metadata['rank']})")
        else:
            table = run_resources(config)
            path = out_dir / f"{basename}.csv"
            table.write_csv(path)
            print(f"wrote {path} ({len(table.rows)} rows)")
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CdforgeError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    return 4 if partial else 0


if __name__ == "__main__":
    sys.exit(main())
