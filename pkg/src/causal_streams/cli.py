"""Command-line front end for reproducible batch runs.

Commands: check, solve, dist, sp, wp, verify.  Data goes to standard output
(JSON is the machine format of record; text and csv are human-oriented),
diagnostics to standard error.  Exit codes: 0 success, 1 analysis rejected,
2 no solution or budget exhausted, 3 usage or parse error.  Seeds default to
a fixed constant so identical invocations emit identical bytes; the
CAUSAL_STREAMS_BUDGET environment variable overrides the default node budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dsl import ElaboratedSystem, analyze_causality, elaborate, parse
from .errors import CausalStreamsError, ParseError, RejectedSystemError
from .metric import word_distance
from .solver import Strategy, check_membership, fix_sp_from, fix_wp
from .streams import Prefix, PrefixSet
from .transformers import as_ndet

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_NO_SOLUTION = 2
EXIT_USAGE = 3

DEFAULT_SEED = 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-streams",
        description="Solve and analyze systems of causal stream equations and inclusions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse a system and print its causality report")
    p_check.add_argument("file", type=Path)
    p_check.add_argument("--semantic-depth", type=int, default=None)
    p_check.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_check.add_argument("--format", choices=("json", "text"), default="json")

    p_solve = sub.add_parser("solve", help="compute certified solution prefixes")
    p_solve.add_argument("file", type=Path)
    p_solve.add_argument("--depth", type=int, required=True)
    p_solve.add_argument("--strategy", choices=("first", "random", "exhaustive"),
                         default="first")
    p_solve.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_solve.add_argument("--budget", type=int, default=None)
    p_solve.add_argument("--format", choices=("json", "text", "csv"), default="json")

    p_dist = sub.add_parser("dist", help="certified distance between two solved streams")
    p_dist.add_argument("file", type=Path)
    p_dist.add_argument("a")
    p_dist.add_argument("b")
    p_dist.add_argument("--depth", type=int, required=True)
    p_dist.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_dist.add_argument("--format", choices=("json", "text"), default="json")

    for name in ("sp", "wp"):
        p_set = sub.add_parser(name, help=f"depth-N fixpoint of the {name} set transformer")
        p_set.add_argument("file", type=Path)
        p_set.add_argument("--depth", type=int, required=True)
        p_set.add_argument("--init", type=Path, default=None,
                           help="JSON prefix-set file to start the iteration from")
        if name == "wp":
            p_set.add_argument("--universe", type=Path, default=None,
                               help="JSON prefix-set file of candidate input prefixes")
        p_set.add_argument("--format", choices=("json", "text", "csv"), default="json")

    p_verify = sub.add_parser("verify", help="re-check a solution prefix for membership")
    p_verify.add_argument("file", type=Path)
    p_verify.add_argument("--solution", type=Path, required=True)
    p_verify.add_argument("--format", choices=("json", "text"), default="json")

    return parser


def _load_system(path: Path) -> ElaboratedSystem:
    text = path.read_text(encoding="utf-8")
    return elaborate(parse(text))


def _emit(payload: dict, fmt: str, text_lines) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        for line in text_lines(payload):
            sys.stdout.write(line + "\n")


def _cmd_check(args) -> int:
    system = parse(args.file.read_text(encoding="utf-8"))
    report = analyze_causality(system, semantic_depth=args.semantic_depth, seed=args.seed)
    payload = report.to_json_dict()
    payload["seed"] = args.seed

    def text_lines(p):
        yield f"verdict: {p['verdict']}"
        for cyc in p["cycles"]:
            yield "cycle: " + " -> ".join(cyc["nodes"]) + f" (delay {cyc['delay']})"
        if "reason" in p:
            yield f"reason: {p['reason']}"

    _emit(payload, args.format, text_lines)
    return EXIT_REJECTED if report.is_rejected else EXIT_OK


def _cmd_solve(args) -> int:
    elaborated = _load_system(args.file)
    strategy = Strategy(args.strategy, seed=args.seed, budget=args.budget)
    result = elaborated.solve(args.depth, strategy=strategy, seed=args.seed)
    payload = result.to_json_dict()
    payload["seed"] = args.seed
    if len(result.prefixes) == 1:
        payload["streams"] = {
            name: elaborated.component_prefix(result.prefixes[0], name).to_strings()
            for name in elaborated.defined_names}

    if args.format == "csv":
        for row in payload["prefixes"]:
            sys.stdout.write(",".join(row) + "\n")
    else:
        def text_lines(p):
            yield f"status: {p['status']}  certificate: {p['certificate']}"
            for row in p["prefixes"]:
                yield ",".join(row)

        _emit(payload, args.format, text_lines)
    if result.status == "ok" and result.found():
        return EXIT_OK
    return EXIT_NO_SOLUTION


def _cmd_dist(args) -> int:
    elaborated = _load_system(args.file)
    for name in (args.a, args.b):
        if name not in elaborated.defined_names:
            raise RejectedSystemError(f"{name!r} is not a defined stream")
    result = elaborated.solve(args.depth, seed=args.seed)
    if not result.found():
        print("no solution to measure", file=sys.stderr)
        return EXIT_NO_SOLUTION
    pa = elaborated.component_prefix(result.prefixes[0], args.a)
    pb = elaborated.component_prefix(result.prefixes[0], args.b)
    d = word_distance(pa, pb)
    payload = {"a": args.a, "b": args.b, "depth": args.depth,
               "distance": str(d), "seed": args.seed}
    _emit(payload, args.format, lambda p: [p["distance"]])
    return EXIT_OK


def _load_prefix_set(path: Path, domain, length=None) -> PrefixSet:
    return PrefixSet.from_json(domain, path.read_text(encoding="utf-8"), length=length)


def _cmd_setop(args, which: str) -> int:
    elaborated = _load_system(args.file)
    T = as_ndet(elaborated.transformer({}))
    if which == "sp":
        init = None
        if args.init is not None:
            init = _load_prefix_set(args.init, T.in_domain)
        out = fix_sp_from(T, args.depth, init)
    else:
        universe = None
        if args.universe is not None:
            universe = _load_prefix_set(args.universe, T.in_domain)
        out = fix_wp(T, args.depth, universe=universe)
    payload = {"depth": args.depth, "set": out.to_lists(), "size": len(out)}
    if args.format == "csv":
        for row in payload["set"]:
            sys.stdout.write(",".join(row) + "\n")
        return EXIT_OK
    _emit(payload, args.format,
          lambda p: [",".join(row) for row in p["set"]] or ["(empty)"])
    return EXIT_OK


def _cmd_verify(args) -> int:
    elaborated = _load_system(args.file)
    T = as_ndet(elaborated.transformer({}))
    rows = json.loads(args.solution.read_text(encoding="utf-8"))
    if rows and isinstance(rows[0], list):
        rows = rows[0]  # accept a solve-output prefixes array
    p = Prefix.from_strings(T.in_domain, rows)
    ok = check_membership(T, p)
    payload = {"member": ok, "depth": len(p)}
    _emit(payload, args.format, lambda d: ["member" if d["member"] else "not-a-member"])
    return EXIT_OK if ok else EXIT_NO_SOLUTION


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "dist":
            return _cmd_dist(args)
        if args.command in ("sp", "wp"):
            return _cmd_setop(args, args.command)
        if args.command == "verify":
            return _cmd_verify(args)
        parser.error(f"unknown command {args.command!r}")
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RejectedSystemError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except FileNotFoundError as exc:
        print(f"cannot read {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except CausalStreamsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
