"""Command-line entry point: run, branches, verify, audit.

Exit status is 0 when every check passes, 1 when a check fails and 2 for
usage or configuration errors (bad flags, unreadable or malformed inputs,
forced-bit strings of the wrong length).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import protocol, verify
from .errors import CapacityError, QNCError, ScriptError, TopologyError
from .network import EventTrace, Network, audit_locc, parse_topology
from .protocol import parse_script
from .report import branches_report, run_report
from .scenarios import SOURCES, builtin
from .statevec import Random

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

FORCE_HELP = (
    "forced measurement outcomes as a 0/1 string, one bit per measurement site "
    "in execution order (the same order used by 'branches'); its length must "
    "equal the scenario's measurement count"
)


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("QNC_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"QNC_SEED must be an integer, got {raw!r}") from None


def _load(args):
    """(name, topology, script) from --builtin or --topology/--script."""
    if args.builtin:
        if args.topology or args.script:
            raise UsageError("--builtin cannot be combined with --topology/--script")
        if args.builtin not in SOURCES:
            raise UsageError(f"unknown builtin {args.builtin!r}; choose from {', '.join(sorted(SOURCES))}")
        topology, script = builtin(args.builtin)
        return args.builtin, topology, script
    if not (args.topology and args.script):
        raise UsageError("give --builtin NAME or both --topology FILE and --script FILE")
    try:
        topo_text = Path(args.topology).read_text()
        script_text = Path(args.script).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        topology = parse_topology(topo_text)
    except TopologyError as exc:
        raise UsageError(f"{args.topology}:{exc}") from None
    try:
        script = parse_script(script_text, topology)
    except ScriptError as exc:
        raise UsageError(f"{args.script}:{exc}") from None
    return Path(args.script).stem, topology, script


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_run(args) -> int:
    name, topology, script = _load(args)
    forced = seed = None
    if args.force is not None:
        if set(args.force) - {"0", "1"}:
            raise UsageError(f"--force must contain only 0 and 1, got {args.force!r}")
        m = script.measurement_count
        if len(args.force) != m:
            raise UsageError(
                f"--force has {len(args.force)} bits but scenario {name!r} has {m} measurement sites"
            )
        forced = args.force
        outcomes = forced
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        outcomes = Random(seed)
    net = Network(topology, args.backend)
    net, report = protocol.run(net, script, outcomes, checkpoints=not args.no_checkpoints)
    _emit(run_report(name, args.backend, report, seed=seed, forced=forced), args.out)
    if args.trace:
        Path(args.trace).write_text(net.trace.to_json())
    if args.figure:
        from .plotting import plot_checkpoints

        plot_checkpoints(report, args.figure, title=f"{name} ({args.backend}) branch {report.bit_string}")
    if not report.live:
        print(f"error: {report.error}", file=sys.stderr)
    return EXIT_OK if report.passed() else EXIT_FAIL


def cmd_branches(args) -> int:
    name, topology, script = _load(args)
    net = Network(topology, args.backend)
    try:
        reports = protocol.enumerate_branches(net, script, cap=args.cap, checkpoints=not args.no_checkpoints)
    except CapacityError as exc:
        raise UsageError(f"{exc} (raise it with --cap)") from None
    _emit(branches_report(name, args.backend, reports, table=not args.summary_only), args.out)
    if args.figure:
        from .plotting import plot_branches

        plot_branches(reports, args.figure, title=f"{name} ({args.backend}): {len(reports)} branches")
    return EXIT_OK if protocol.summarize(reports)["passed"] else EXIT_FAIL


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.suite == "lemmas":
        results = verify.lemma_suite(args.trials or 100, seed)
    elif args.suite == "backends":
        results = [verify.backend_suite(args.trials or 200, seed)]
    else:
        backends = [args.backend] if args.backend else ["sv", "stab"]
        results = []
        for backend in backends:
            for r in verify.correspondence_suite(backend):
                r.name = f"{r.name}[{backend}]"
                results.append(r)
    lines = [f"suite={args.suite}", f"seed={seed}"]
    lines += [r.line() for r in results]
    for r in results:
        lines += [f"# {r.name}: {f}" for f in r.failures[:5]]
    ok = all(r.passed for r in results)
    lines.append(f"result={'PASS' if ok else 'FAIL'}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_audit(args) -> int:
    try:
        trace = EventTrace.from_json(Path(args.trace).read_text())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{args.trace}: not a valid trace ({exc})") from None
    audit = audit_locc(trace)
    _emit(str(audit) + "\n", args.out)
    return EXIT_OK if audit.passed else EXIT_FAIL


def _scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", metavar="NAME", help=f"builtin scenario: {', '.join(SOURCES)}")
    p.add_argument("--topology", metavar="FILE", help="topology file")
    p.add_argument("--script", metavar="FILE", help="protocol script file")
    p.add_argument("--backend", choices=("sv", "stab"), default="sv", help="simulator backend (default sv)")
    p.add_argument("--no-checkpoints", action="store_true", help="skip checkpoint fidelity evaluation")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument("--figure", metavar="PATH", help="also render a figure to this file (png, pdf, svg)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnc",
        description="Simulate LOCC network-coding protocols on quantum repeater networks.",
        epilog="exit status: 0 all checks pass, 1 a check failed, 2 usage or configuration error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute one measurement branch")
    _scenario_args(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--seed", type=int, help="seed for random outcomes (default $QNC_SEED or 0)")
    g.add_argument("--force", metavar="BITS", help=FORCE_HELP)
    p.add_argument("--trace", metavar="PATH", help="write the event trace as JSON")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("branches", help="enumerate every measurement branch")
    _scenario_args(p)
    p.add_argument("--cap", type=int, default=16, help="refuse scenarios with more measurement sites (default 16)")
    p.add_argument("--summary-only", action="store_true", help="omit the per-branch table")
    p.set_defaults(func=cmd_branches)

    p = sub.add_parser("verify", help="randomized property suites")
    p.add_argument("suite", choices=("lemmas", "backends", "correspondence"))
    p.add_argument("--trials", type=int, help="random cases per suite (default 100 lemmas, 200 backends)")
    p.add_argument("--seed", type=int, help="RNG seed (default $QNC_SEED or 0)")
    p.add_argument("--backend", choices=("sv", "stab"), help="correspondence: one backend only")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("audit", help="replay the LOCC audit on a stored trace")
    p.add_argument("trace", help="trace JSON written by 'run --trace'")
    p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qnc {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QNCError as exc:
        print(f"qnc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
