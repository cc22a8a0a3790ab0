"""Command line entry point: ``ergolab run|list|describe``.

Exit codes: 0 success, 1 a step failed its assertions or raised, 2 the
scenario could not be parsed or validated.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .runner import (
    EXIT_INPUT,
    EXIT_OK,
    REGISTRY,
    ScenarioError,
    builtin_path,
    list_builtin_scenarios,
    load_scenario,
    run_scenario,
)


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    out = args.out if args.out is not None else f"results/{scenario['name']}"
    outcome = run_scenario(scenario, out, args.seed)
    for i, step in enumerate(outcome.summary["steps"]):
        mark = "ok  " if step.get("passed") else "FAIL"
        print(f"[{mark}] {i:02d} {step['op']}")
    for msg in outcome.messages:
        print(msg, file=sys.stderr)
    if outcome.files:
        print(f"wrote {len(outcome.files)} file(s) to {out}")
    return outcome.status


def _cmd_list(args) -> int:
    for name in list_builtin_scenarios():
        print(name)
    return EXIT_OK


def _cmd_describe(args) -> int:
    name = args.name
    if name in REGISTRY:
        op = REGISTRY[name]
        print(f"operation {op.name}: {op.description}")
        print(json.dumps(op.schema, indent=2, sort_keys=True))
        return EXIT_OK
    path = builtin_path(name)
    if path is None:
        print(f"error: no built-in scenario or operation named {name!r}", file=sys.stderr)
        return EXIT_INPUT
    obj = json.loads(path.read_text())
    print(f"scenario {obj['name']}")
    if obj.get("description"):
        print(obj["description"])
    for i, step in enumerate(obj["steps"]):
        checks = ", ".join(f"{a['path']} {a['op']} {a['value']}" for a in step.get("assert", []))
        print(f"  {i:02d} {step['op']}" + (f"  [{checks}]" if checks else ""))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ergolab", description="Run ergodic-theory experiment scenarios.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario file or built-in scenario name")
    run.add_argument("scenario")
    run.add_argument("--out", default=None, help="output directory (default results/<name>)")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.set_defaults(func=_cmd_run)
    ls = sub.add_parser("list", help="list built-in scenarios")
    ls.set_defaults(func=_cmd_list)
    desc = sub.add_parser("describe", help="describe a built-in scenario or an operation")
    desc.add_argument("name")
    desc.set_defaults(func=_cmd_describe)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
