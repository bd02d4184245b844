"""Command-line front end.

One subcommand per pipeline plus ``validate``; every subcommand accepts the
same small flag set.  Exit codes: 0 success, 2 configuration error,
3 physics/validation error, 4 numerical failure inside a pipeline.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import ConfigError, PhysicsError, SignalError
from .pipelines import run
from .scenario import PIPELINES, build_scenario, load_scenario, scenario_digest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_PIPELINE = 4


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", metavar="FILE", default=None,
                   help="scenario JSON (defaults apply when omitted)")
    p.add_argument("--out", metavar="DIR", default=None,
                   help="output directory (default: scenario output_dir)")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")
    p.add_argument("--repeats", type=int, default=None, help="override repeat count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jrcss",
        description="Photonic joint radar / communication / spectrum-sensing simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    help_by_cmd = {
        "generate": "synthesize the transmit chain and dump spectrum/envelope",
        "radar-range": "de-chirp ranging against the configured scene",
        "radar-isar": "turntable ISAR imaging over the configured aperture",
        "comm": "self-mixing ASK demodulation with envelope compensation",
        "sense": "frequency-to-time spectrum estimates from the filtered probe",
        "rate-study": "two-tone resolution versus acquisition sample rate",
    }
    for name in PIPELINES:
        p = sub.add_parser(name, help=help_by_cmd[name])
        _add_common(p)
    v = sub.add_parser("validate", help="parse and check a scenario, print its digest")
    _add_common(v)
    return parser


def _load(args) -> "Scenario":
    if args.scenario is not None:
        scenario = load_scenario(args.scenario)
    else:
        scenario = build_scenario({})
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.repeats is not None:
        if args.repeats < 1:
            raise ConfigError("schema-violation", "repeats: must be >= 1")
        overrides["repeats"] = args.repeats
    if args.out is not None:
        overrides["output_dir"] = args.out
    if overrides:
        scenario = replace(scenario, **overrides)
    return scenario


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = _load(args)
        if args.command == "validate":
            print(json.dumps({"digest": scenario_digest(scenario),
                              "pipeline": scenario.pipeline}))
            return EXIT_OK
        if scenario.pipeline != args.command:
            scenario = replace(scenario, pipeline=args.command)
        report = run(scenario, out_dir=args.out)
    except ConfigError as exc:
        print(f"config error [{exc.code}]: {exc.message or exc.code}", file=sys.stderr)
        return EXIT_CONFIG
    except PhysicsError as exc:
        print(f"physics error [{exc.code}]: {exc.message or exc.code}", file=sys.stderr)
        return EXIT_PHYSICS
    except SignalError as exc:
        print(f"pipeline error [{exc.code}]: {exc.message or exc.code}", file=sys.stderr)
        return EXIT_PIPELINE
    except (FloatingPointError, ZeroDivisionError) as exc:
        print(f"pipeline error [numerical]: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    print(json.dumps({
        "digest": report.scenario_digest,
        "pipeline": report.pipeline,
        "artifacts": report.artifacts,
        "wall_time_s": round(report.wall_time_s, 3),
    }))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
