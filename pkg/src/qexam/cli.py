"""Command-line front end: run scenario batches, replay trials, sweep decoys.

Configuration comes from an optional key=value file mirroring the
ExamConfig fields, overridden by command-line flags.  Reports land in
the output directory as summary plus per-trial detail files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .adversary import AttackConfig
from .errors import ConfigurationError
from .harness import (
    Report,
    ScenarioSpec,
    emit_report,
    replay_trial,
    run_scenarios,
    _summary_record,
    _trial_record,
)
from .protocol import ExamConfig, Scenario

CONFIG_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExamConfig)}
_PARSERS = {"int": int, "float": float}


def load_config_file(path: str | Path) -> dict:
    """Parse `key = value` lines into ExamConfig keyword arguments."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_FIELD_TYPES:
            raise ConfigurationError(f"{path}:{lineno}: unknown configuration key {key!r}")
        parser = _PARSERS.get(CONFIG_FIELD_TYPES[key], int)
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _build_config(args: argparse.Namespace, decoys: int | None = None) -> ExamConfig:
    values = load_config_file(args.config) if args.config else {}
    if args.seed is not None:
        values["seed"] = args.seed
    if decoys is not None:
        values["decoy_count"] = decoys
    elif args.decoys is not None:
        values["decoy_count"] = args.decoys
    return ExamConfig(**values)


def _build_attack(args: argparse.Namespace) -> AttackConfig:
    try:
        return AttackConfig(attacker=args.attacker, target=args.target)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def _build_spec(args: argparse.Namespace, label: str, decoys: int | None = None) -> ScenarioSpec:
    scenario = Scenario(args.scenario)
    config = _build_config(args, decoys=decoys)
    attack = _build_attack(args) if scenario is not Scenario.HONEST else None
    return ScenarioSpec(
        label=label, config=config, scenario=scenario, attack=attack, trials=args.trials
    )


def _print_summaries(report: Report) -> None:
    for result in report.scenarios:
        record = _summary_record(result)
        print(json.dumps(record))


def cmd_run(args: argparse.Namespace) -> int:
    spec = _build_spec(args, label=args.scenario)
    report = run_scenarios([spec], workers=args.workers)
    paths = emit_report(report, args.out, format=args.format)
    _print_summaries(report)
    for path in paths:
        print(f"wrote {path}", file=sys.stderr)
    return 0 if all(r.error is None for r in report.scenarios) else 1


def cmd_replay(args: argparse.Namespace) -> int:
    spec = _build_spec(args, label=args.scenario)
    detail = replay_trial(spec, args.trial)
    print(json.dumps(_trial_record(spec.label, detail)))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.param != "decoys":
        raise ConfigurationError(f"only the 'decoys' parameter can be swept, not {args.param!r}")
    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad sweep values {args.values!r}") from exc
    if not values:
        raise ConfigurationError("sweep needs at least one value")
    specs = [_build_spec(args, label=f"decoys-{d}", decoys=d) for d in values]
    report = run_scenarios(specs, workers=args.workers)
    paths = emit_report(report, args.out, format=args.format)
    _print_summaries(report)
    for path in paths:
        print(f"wrote {path}", file=sys.stderr)
    return 0 if all(r.error is None for r in report.scenarios) else 1


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value file mirroring ExamConfig fields")
    parser.add_argument(
        "--scenario",
        default="honest",
        choices=[s.value for s in Scenario],
        help="which scenario to execute",
    )
    parser.add_argument("--trials", type=int, default=1000, help="independent trials to run")
    parser.add_argument("--seed", type=int, default=None, help="master seed (overrides config file)")
    parser.add_argument("--decoys", type=int, default=None, help="decoys per participant sequence")
    parser.add_argument("--attacker", type=int, default=2, help="dishonest participant index")
    parser.add_argument("--target", type=int, default=1, help="participant whose key is stolen")
    parser.add_argument("--workers", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qexam",
        description="Simulate the multiparty key-distribution exam protocol, "
        "the inside CNOT tap, and the decoy-qubit countermeasure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario batch and write a report")
    _add_common(run)
    run.add_argument("--out", default="reports", help="output directory")
    run.add_argument("--format", default="json", choices=["json", "csv"], help="report format")
    run.set_defaults(func=cmd_run)

    replay = sub.add_parser("replay", help="recompute one recorded trial")
    _add_common(replay)
    replay.add_argument("--trial", type=int, required=True, help="trial index to replay")
    replay.set_defaults(func=cmd_replay)

    sweep = sub.add_parser("sweep", help="run a scenario batch across decoy counts")
    _add_common(sweep)
    sweep.add_argument("--param", default="decoys", help="parameter to sweep")
    sweep.add_argument("--values", required=True, help="comma-separated parameter values")
    sweep.add_argument("--out", default="reports", help="output directory")
    sweep.add_argument("--format", default="json", choices=["json", "csv"], help="report format")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
