"""Command line entry point: scenario runs, figure analogs, config schema.

Exit codes: 0 success, 2 configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .lti import FrequencyGrid


def _grid_arg(text):
    try:
        lo, hi, n = text.split(",")
        return FrequencyGrid.log_spaced(float(lo), float(hi), int(n))
    except Exception as exc:
        raise argparse.ArgumentTypeError(
            "grid must be min,max,points (e.g. 1e-2,1e2,400)") from exc


def _error_json(code, exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="podlim",
        description="Power-oscillation-damping limitation studies: scenario "
                    "runs and paper-figure analog artifacts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a JSON scenario config")
    p_run.add_argument("config", help="path to the scenario JSON file")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--grid", type=_grid_arg, default=None,
                       help="frequency grid as min,max,points")
    p_run.add_argument("--seed", type=int, default=None,
                       help="reserved; current algorithms are deterministic")

    p_repro = sub.add_parser("repro", help="reproduce a figure analog")
    p_repro.add_argument("figure", help="fig4|fig5like|fig6|fig7|fig11|fig12|"
                                        "fig14|fig15|fig16|fig17|fig18")
    p_repro.add_argument("--out", default=None,
                         help="output directory (default ./out_<figure>)")
    p_repro.add_argument("--grid", type=_grid_arg, default=None,
                         help="frequency grid as min,max,points")
    p_repro.add_argument("--seed", type=int, default=None,
                         help="reserved; current algorithms are deterministic")

    sub.add_parser("schema", help="print the scenario config JSON schema")

    args = parser.parse_args(argv)

    from . import scenarios

    if args.command == "schema":
        schema = dict(scenarios.CONFIG_SCHEMA)
        schema["per_kind_parameters"] = scenarios._KIND_PARAM_SCHEMAS
        print(json.dumps(schema, indent=1, sort_keys=True))
        return 0

    if args.command == "run":
        try:
            with open(args.config) as f:
                config = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            return _error_json(2, exc)
        try:
            if args.grid is not None:
                config = dict(config)
                w = args.grid.omegas
                config["grid"] = {"min": float(w[0]), "max": float(w[-1]),
                                  "points": int(w.size)}
            manifest = scenarios.run_config(config, outdir=args.out)
        except scenarios.ConfigError as exc:
            return _error_json(2, exc)
        except Exception as exc:
            return _error_json(3, exc)
        print(manifest)
        return 0

    if args.command == "repro":
        outdir = args.out or f"out_{args.figure}"
        try:
            manifest = scenarios.repro(args.figure, outdir, grid=args.grid)
        except scenarios.ConfigError as exc:
            return _error_json(2, exc)
        except Exception as exc:
            return _error_json(3, exc)
        print(manifest)
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
