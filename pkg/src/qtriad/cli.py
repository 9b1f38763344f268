"""Command-line interface.

Subcommands:

* ``run``: execute a scenario batch, writing transcripts and a stats CSV.
  Exit code 0 when the scenario's expectation holds, 1 when it is violated,
  2 on usage errors.
* ``check-structure``: feasibility verdicts for an adversary structure.
* ``list-scenarios``: the scenario catalog.
"""

from __future__ import annotations

import argparse
import json
import sys

from .advstruct import (AdversaryStructure, PlayerSet, classical_feasible,
                        post_termination_structure, quantum_feasible)
from .harness import SCENARIOS, ScenarioConfig, run_scenario, stats_csv


def _parse_param(raw: str) -> tuple[list[str], object]:
    if "=" not in raw:
        raise ValueError(f"--param expects key=value, got {raw!r}")
    key, value = raw.split("=", 1)
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key.split("."), parsed


def _merge_param(params: dict, path: list[str], value) -> None:
    node = params
    for part in path[:-1]:
        node = node.setdefault(part, {})
    node[path[-1]] = value


def _cmd_run(args) -> int:
    if args.scenario not in SCENARIOS:
        print(f"error: unknown scenario {args.scenario!r} "
              f"(see `list-scenarios`)", file=sys.stderr)
        return 2
    params: dict = {}
    if args.config:
        with open(args.config) as fh:
            blob = json.load(fh)
        params.update(blob.get("params", {}))
        args.seed = args.seed if args.seed is not None else blob.get("seed", 0)
        args.runs = args.runs if args.runs is not None else blob.get("runs", 1)
    for raw in args.param or []:
        try:
            path, value = _parse_param(raw)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        _merge_param(params, path, value)
    config = ScenarioConfig(scenario=args.scenario,
                            seed=args.seed if args.seed is not None else 0,
                            runs=args.runs if args.runs is not None else 1,
                            params=params,
                            reveal_private=args.reveal_private,
                            out=args.out)
    stats, _ = run_scenario(config)
    sys.stdout.write(stats_csv(stats))
    return 0 if stats.expectation_met else 1


def _parse_maximal(raw: str) -> list[list[str]]:
    sets = []
    for chunk in raw.split(";"):
        chunk = chunk.strip().strip("{}")
        if not chunk:
            continue
        sets.append([p.strip() for p in chunk.split(",") if p.strip()])
    return sets


def _cmd_check_structure(args) -> int:
    players = PlayerSet(tuple(p.strip() for p in args.players.split(",")
                              if p.strip()))
    structure = AdversaryStructure(_parse_maximal(args.maximal))
    if args.mode == "classical":
        feasible, witness = classical_feasible(players, structure)
        out = {"feasible": feasible, "witness": witness}
    elif args.mode == "quantum":
        feasible, witness = quantum_feasible(players, structure)
        out = {"feasible": feasible, "witness": witness}
    else:
        if not args.trusted:
            print("error: --mode post needs --trusted", file=sys.stderr)
            return 2
        extended = post_termination_structure(players, structure, args.trusted)
        out = {"feasible": True, "extended": extended.to_json()}
    print(json.dumps(out, sort_keys=True))
    return 0


def _cmd_list_scenarios(_args) -> int:
    for name in sorted(SCENARIOS):
        print(f"{name}: {SCENARIOS[name].description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtriad")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario batch")
    run.add_argument("--scenario", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--runs", type=int, default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--reveal-private", action="store_true")
    run.add_argument("--param", action="append",
                     help="dotted override, e.g. commit.rounds=8")
    run.add_argument("--config", default=None,
                     help="JSON file mirroring the scenario config")
    run.set_defaults(func=_cmd_run)

    check = sub.add_parser("check-structure",
                           help="adversary-structure feasibility")
    check.add_argument("--players", required=True,
                       help='comma list, e.g. "Alice,Bob,Helen"')
    check.add_argument("--maximal", required=True,
                       help='maximal sets, e.g. "{Alice};{Bob};{Helen}"')
    check.add_argument("--mode", choices=("classical", "quantum", "post"),
                       default="classical")
    check.add_argument("--trusted", default=None)
    check.set_defaults(func=_cmd_check_structure)

    ls = sub.add_parser("list-scenarios", help="print the scenario catalog")
    ls.set_defaults(func=_cmd_list_scenarios)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
