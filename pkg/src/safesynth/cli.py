"""Command-line driver: check, synthesize, cross-validate, inspect.

Exit codes: 0 realizable / agreement / verified, 1 unrealizable / refuted,
2 unknown (budget), 3 cross-check disagreement, 4 parse error, 5 I/O error.
"""
from __future__ import annotations

import argparse
import random
import sys

from .config import EngineConfig
from .covering import CoveringLimitExceeded, EnvSpaceExceeded
from .game import OracleBudgetExceeded, solve, strategy_machine
from .gen import GenConfig, random_spec, spec_text
from .parser import ParseError, SpecFile, parse, render
from .synthesis import (
    default_horizon,
    extract,
    machine_from_json,
    machine_to_dot,
    machine_to_json,
    verify,
)
from .tableau import Verdict, decide
from .tnf import tnf

EXIT_REALIZABLE = 0
EXIT_UNREALIZABLE = 1
EXIT_UNKNOWN = 2
EXIT_DISAGREE = 3
EXIT_PARSE = 4
EXIT_IO = 5


class _Exit(Exception):
    def __init__(self, code: int):
        super().__init__(code)
        self.code = code

_VERDICT_TEXT = {
    Verdict.OPEN: "REALIZABLE",
    Verdict.CLOSED: "UNREALIZABLE",
    Verdict.UNKNOWN: "UNKNOWN",
}
_VERDICT_EXIT = {
    Verdict.OPEN: EXIT_REALIZABLE,
    Verdict.CLOSED: EXIT_UNREALIZABLE,
    Verdict.UNKNOWN: EXIT_UNKNOWN,
}


def _add_engine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-nodes", type=int, default=100_000)
    p.add_argument("--max-branch", type=int, default=2_000)
    p.add_argument("--max-coverings", type=int, default=64)
    p.add_argument("--max-env-space", type=int, default=65_536)
    p.add_argument("--heuristic", choices=["weakest", "declared"], default="weakest")
    p.add_argument("--prune-siblings", action="store_true")
    p.add_argument("--simplify", choices=["subsume", "none"], default="subsume")
    p.add_argument("--oracle-budget", type=int, default=500_000)
    p.add_argument("--horizon", type=int, default=None)


def _config(args: argparse.Namespace) -> EngineConfig:
    return EngineConfig(
        max_nodes=args.max_nodes,
        max_branch=args.max_branch,
        max_coverings=args.max_coverings,
        max_env_space=args.max_env_space,
        heuristic=args.heuristic,
        prune_siblings=args.prune_siblings,
        simplify=args.simplify,
        oracle_budget=args.oracle_budget,
        horizon=args.horizon,
    )


def _load(path: str) -> SpecFile:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise _Exit(EXIT_IO)
    try:
        return parse(text)
    except ParseError as exc:
        print(f"error: {path}:{exc}", file=sys.stderr)
        raise _Exit(EXIT_PARSE)


def _write(path: str, data: str) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(data)
    except OSError as exc:
        print(f"error: cannot write {path}: {exc}", file=sys.stderr)
        raise _Exit(EXIT_IO)


def cmd_check(args) -> int:
    spec = _load(args.file)
    verdict, tab = decide(spec, _config(args))
    print(_VERDICT_TEXT[verdict])
    if args.dot:
        _write(args.dot, tab.to_dot())
    return _VERDICT_EXIT[verdict]


def cmd_synth(args) -> int:
    spec = _load(args.file)
    cfg = _config(args)
    verdict, tab = decide(spec, cfg)
    print(_VERDICT_TEXT[verdict])
    if verdict is not Verdict.OPEN:
        return _VERDICT_EXIT[verdict]
    machine = extract(tab, spec)
    if args.strategy_out:
        _write(args.strategy_out, machine_to_json(machine))
    if args.dot:
        _write(args.dot, machine_to_dot(machine))
    if args.tableau_dot:
        _write(args.tableau_dot, tab.to_dot())
    if not args.strategy_out and not args.dot:
        sys.stdout.write(machine_to_json(machine))
    return EXIT_REALIZABLE


def cmd_tnf(args) -> int:
    spec = _load(args.file)
    t = tnf(spec.safety_nnf, spec.vocabulary, args.simplify)
    print(render(t.formula()))
    return EXIT_REALIZABLE


def cmd_oracle(args) -> int:
    spec = _load(args.file)
    try:
        result = solve(spec, _config(args))
    except OracleBudgetExceeded as exc:
        print("UNKNOWN")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    print("REALIZABLE" if result.realizable else "UNREALIZABLE")
    if result.realizable and args.strategy_out:
        _write(args.strategy_out, machine_to_json(strategy_machine(result.strategy, spec)))
    return EXIT_REALIZABLE if result.realizable else EXIT_UNREALIZABLE


def cmd_crosscheck(args) -> int:
    spec = _load(args.file)
    cfg = _config(args)
    verdict, _ = decide(spec, cfg)
    try:
        oracle = solve(spec, cfg)
    except OracleBudgetExceeded:
        print(f"tableau={_VERDICT_TEXT[verdict]} oracle=UNKNOWN")
        return EXIT_UNKNOWN
    oracle_verdict = Verdict.OPEN if oracle.realizable else Verdict.CLOSED
    print(f"tableau={_VERDICT_TEXT[verdict]} oracle={_VERDICT_TEXT[oracle_verdict]}")
    if verdict is Verdict.UNKNOWN:
        return EXIT_UNKNOWN
    return EXIT_REALIZABLE if verdict is oracle_verdict else EXIT_DISAGREE


def cmd_verify(args) -> int:
    spec = _load(args.file)
    try:
        with open(args.strategy, encoding="utf-8") as fh:
            machine = machine_from_json(fh.read(), spec.vocabulary)
    except OSError as exc:
        print(f"error: cannot read {args.strategy}: {exc}", file=sys.stderr)
        return EXIT_IO
    horizon = args.horizon if args.horizon else default_horizon(spec)
    ok, cex = verify(machine, spec, horizon)
    if ok:
        print(f"VERIFIED horizon={horizon}")
        return EXIT_REALIZABLE
    pretty = [dict(v.items) for v in cex]
    print(f"REFUTED env sequence: {pretty}")
    return EXIT_UNREALIZABLE


def cmd_fuzz(args) -> int:
    cfg = _config(args)
    gen_cfg = GenConfig()
    rng = random.Random(args.seed)
    disagreements = unknown = 0
    for i in range(args.count):
        spec = random_spec(rng, gen_cfg)
        verdict, _ = decide(spec, cfg)
        try:
            oracle = solve(spec, cfg)
        except OracleBudgetExceeded:
            unknown += 1
            continue
        oracle_verdict = Verdict.OPEN if oracle.realizable else Verdict.CLOSED
        if verdict is Verdict.UNKNOWN:
            unknown += 1
        elif verdict is not oracle_verdict:
            disagreements += 1
            print(f"disagreement on spec {i}:", file=sys.stderr)
            print(spec_text(spec), file=sys.stderr)
    print(
        f"{args.count} specs: {args.count - disagreements - unknown} agree, "
        f"{unknown} unknown, {disagreements} disagreements"
    )
    if disagreements:
        return EXIT_DISAGREE
    return EXIT_UNKNOWN if unknown else EXIT_REALIZABLE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="safesynth",
        description="Realizability checking and strategy synthesis for bounded safety specifications.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide realizability")
    p.add_argument("file")
    p.add_argument("--dot", help="write the decision tree as DOT")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synth", help="decide and extract a winning strategy")
    p.add_argument("file")
    p.add_argument("--strategy-out", help="write the strategy as JSON")
    p.add_argument("--dot", help="write the strategy machine as DOT")
    p.add_argument("--tableau-dot", help="write the decision tree as DOT")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tnf", help="print the terse normal form of the safety body")
    p.add_argument("file")
    p.add_argument("--simplify", choices=["subsume", "none"], default="subsume")
    p.set_defaults(func=cmd_tnf)

    p = sub.add_parser("oracle", help="decide via the explicit safety game")
    p.add_argument("file")
    p.add_argument("--strategy-out", help="write the game strategy as JSON")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("crosscheck", help="run both deciders and compare")
    p.add_argument("file")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("verify", help="drive a strategy JSON against the spec")
    p.add_argument("file")
    p.add_argument("--strategy", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fuzz", help="cross-validate on random specifications")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    _add_engine_flags(p)
    p.set_defaults(func=cmd_fuzz)

    return ap


def run(argv: list[str]) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        return exc.code
    except (EnvSpaceExceeded, CoveringLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
