"""Command-line client for the bound-evaluation library.

Subcommands: ``run`` evaluates anchor subsets of a scenario and writes
CSV/JSON, ``validate`` checks a scenario file against the schema,
``oracle`` runs the cross-validation suites, ``serve`` starts the HTTP
service.  Exit codes: 0 success, 1 validation failure, 2 compute failure.
"""

from __future__ import annotations

import argparse
import sys

from . import oracle, scenario
from .errors import (HybridPosError, ScenarioParseError,
                     ScenarioValidationError, UnknownScenarioError)
from .schemas import SelectorSpec

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_COMPUTE = 2


def parse_indices(text: str) -> list[int]:
    """Parse anchor selections: 'none', '1,3', or inclusive ranges '0..3'."""
    text = text.strip()
    if text in ("", "none"):
        return []
    indices: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            indices.extend(range(int(lo), int(hi) + 1))
        else:
            indices.append(int(part))
    return indices


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridpos",
        description="Hybrid GNSS + 5G position/velocity error bounds")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate anchor subsets of a scenario")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="path to a scenario YAML file")
    src.add_argument("--builtin", help="builtin scenario name (A or B)")
    run.add_argument("--gnbs", help="gNB indices, e.g. '0,1' or '0..1' or 'none'")
    run.add_argument("--sats", help="satellite indices, e.g. '0..3' or 'none'")
    run.add_argument("--sweep-all", action="store_true",
                     help="evaluate every anchor subset")
    run.add_argument("--out", help="output file (default: stdout)")
    run.add_argument("--format", choices=["csv", "json"], default="csv")

    val = sub.add_parser("validate", help="schema-check a scenario file")
    val.add_argument("--scenario", required=True, help="path to a scenario YAML file")

    orc = sub.add_parser("oracle", help="run the cross-validation suites")
    orc.add_argument("--fim-instances", type=int, default=50)
    orc.add_argument("--jacobian-states", type=int, default=1000)

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8000)
    return parser


def _cmd_run(args) -> int:
    try:
        spec = (scenario.load_scenario(args.scenario) if args.scenario
                else scenario.builtin_scenario(args.builtin))
    except (ScenarioParseError, ScenarioValidationError, UnknownScenarioError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    selector = SelectorSpec(
        gnb_indices=parse_indices(args.gnbs) if args.gnbs is not None else None,
        sat_indices=parse_indices(args.sats) if args.sats is not None else None,
        sweep_all=args.sweep_all,
    )
    try:
        rows = scenario.evaluate(spec, selector)
        if args.out:
            scenario.emit(rows, args.format, args.out)
        else:
            import tempfile
            from pathlib import Path
            with tempfile.TemporaryDirectory() as tmp:
                target = Path(tmp) / f"rows.{args.format}"
                scenario.emit(rows, args.format, target)
                sys.stdout.write(target.read_text())
    except (HybridPosError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        spec = scenario.load_scenario(args.scenario)
    except (ScenarioParseError, ScenarioValidationError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"ok: {spec.name} ({len(spec.gnbs)} gNBs, {len(spec.satellites)} satellites)")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    report = oracle.run_oracle_suite(fim_instances=args.fim_instances,
                                     jacobian_states=args.jacobian_states)
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status} {check.name}: max deviation {check.max_deviation:.3e} "
              f"(tolerance {check.tolerance:g})")
    return EXIT_OK if report.passed else EXIT_COMPUTE


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate,
                "oracle": _cmd_oracle, "serve": _cmd_serve}
    try:
        return handlers[args.command](args)
    except HybridPosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
