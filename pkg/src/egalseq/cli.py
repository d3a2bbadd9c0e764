"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 budget failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import harness, ingest, oracle
from .axioms import PROPERTIES
from .model import (
    Election,
    InvalidElection,
    InvalidSequence,
    agent_scores,
    dumps_election,
    read_election,
    sat_histogram,
    score_triple,
)
from .oracle import BudgetExceeded
from .rules import EXACT_RULES, RULES, normalize_rule, single_winner, winners
from .solver import Infeasible, Objective, SearchBudgetExceeded, SolveConfig, WinnerSet, solve_one

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class BudgetFailure(Exception):
    pass


def _rule(value: str) -> str:
    try:
        return normalize_rule(value)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _rules(value: str) -> list[str]:
    return [_rule(v) for v in value.split(",") if v]


def _positive(kind):
    def parse(value):
        x = kind(value)
        if x <= 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {value}")
        return x
    return parse


def _ints(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {value!r}") from None


def _config(args) -> SolveConfig:
    return SolveConfig(winner_cap=args.winner_cap, time_budget=args.time_limit)


def _load(args) -> Election:
    e = read_election(args.instance)
    if args.kappa is not None:
        e = ingest.kappa_rule(e, args.kappa)
    return e


def _corpus(args):
    corpus = harness.load_corpus(args.corpus)
    if args.kappa is not None:
        corpus = [(name, ingest.kappa_rule(e, args.kappa)) for name, e in corpus]
    return corpus


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _describe(e: Election, x) -> dict:
    tri = score_triple(e, x)
    return {
        "committees": x.to_lists(e),
        "agent_min": tri.agent_min,
        "level_min": tri.level_min,
        "sum": tri.total,
        "ord": sorted(agent_scores(e, x)),
        "histogram": list(sat_histogram(e, x).counts),
    }


def _print_winner(d: dict, e: Election):
    names = e.meta.get("levels") or [str(t + 1) for t in range(e.tau)]
    for name, committee in zip(names, d["committees"]):
        print(f"  level {name}: {', '.join(committee)}")
    print(f"  agent_min={d['agent_min']} level_min={d['level_min']} sum={d['sum']}")
    print(f"  ord=({', '.join(map(str, d['ord']))}) histogram={d['histogram']}")


def cmd_solve(args) -> int:
    e = _load(args)
    started = time.perf_counter()
    optimal = True
    if args.rule in EXACT_RULES:
        res = solve_one(e, Objective.for_rule(args.rule), _config(args))
        x, optimal = res.sequence, res.optimal
    else:
        x = single_winner(e, args.rule, _config(args))
    elapsed = time.perf_counter() - started
    d = _describe(e, x)
    d["rule"], d["seconds"], d["optimal"] = args.rule, round(elapsed, 6), optimal
    if args.json:
        print(json.dumps(d))
    else:
        print(f"rule {args.rule}")
        _print_winner(d, e)
        print(f"  time {elapsed:.4f}s")
    if not optimal:
        raise BudgetFailure("time limit reached; the printed sequence may not be optimal")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    e = _load(args)
    ws: WinnerSet = winners(e, args.rule, _config(args))
    out = [_describe(e, x) for x in ws]
    if args.json:
        print(json.dumps({"rule": args.rule, "complete": ws.complete, "reason": ws.reason, "winners": out}))
    else:
        print(f"rule {args.rule}: {len(ws)} winner(s){'' if ws.complete else ' (incomplete: ' + ws.reason + ')'}")
        for i, d in enumerate(out, 1):
            print(f"#{i}")
            _print_winner(d, e)
    if ws.reason in ("time", "budget"):
        raise BudgetFailure(f"winner enumeration stopped early ({ws.reason})")
    return EXIT_OK


def cmd_score_table(args) -> int:
    corpus = _corpus(args)
    table = harness.score_table(corpus, args.rules, _config(args), args.jobs)
    _emit(table.to_csv(), args.out)
    if args.meta:
        Path(args.meta).write_text(json.dumps(table.metadata(), indent=1) + "\n")
    if args.emit_plot_data:
        outdir = Path(args.emit_plot_data)
        outdir.mkdir(parents=True, exist_ok=True)
        for rule, series in harness.plot_series(table, corpus).items():
            lines = ["size,seconds"] + [f"{x},{y:.6f}" for x, y in series]
            (outdir / f"runtime_{rule}.csv").write_text("\n".join(lines) + "\n")
    if table.failures:
        print(f"{len(table.failures)} instance(s) excluded after solver failures", file=sys.stderr)
    return EXIT_OK


def cmd_axiom_scan(args) -> int:
    corpus = _corpus(args)
    policy = harness.DiscardPolicy(
        greedy_all_time_limit=args.greedy_time_limit,
        winner_cap=args.winner_cap,
        max_agents=args.max_agents,
        max_candidates=args.max_candidates,
        solver_time_limit=args.time_limit,
    )
    report = harness.axiom_scan(corpus, args.property, args.rules, policy, args.jobs)
    _emit(report.to_csv(), args.out)
    if args.summary:
        Path(args.summary).write_text(json.dumps(report.summary(), indent=1) + "\n")
    if args.witnesses:
        Path(args.witnesses).write_text(report.witnesses_jsonl())
    return EXIT_OK


def cmd_ingest(args) -> int:
    l = args.kappa if args.kappa is not None else 2
    res = ingest.ingest(args.profile, args.labels, args.instance_class, l)
    if isinstance(res, ingest.Rejected):
        print(f"rejected: {res.reason}", file=sys.stderr)
        return EXIT_DATA
    _emit(dumps_election(res), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    kind = args.generator
    if kind == "example1":
        e = oracle.gen_example1()
    elif kind == "random":
        rng = random.Random(args.seed)
        e = harness.random_election(rng, args.agents, args.levels, args.cands, args.umax, args.kmax)
        e.meta["seed"] = args.seed
    elif kind == "partition":
        e = oracle.gen_partition_instance(args.set)
    elif kind == "binpacking":
        e = oracle.gen_binpacking_instance(args.set, args.bins)
    else:
        edges = []
        for part in args.edges.split(","):
            u, _, v = part.partition("-")
            if not u or not v:
                raise InvalidElection(f"bad edge {part!r}, expected u-v")
            edges.append((u, v))
        e = oracle.gen_vertexcover_instance(edges, args.k)
    if args.kappa is not None:
        e = ingest.kappa_rule(e, args.kappa)
    _emit(dumps_election(e), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--winner-cap", type=_positive(int), default=30, help="stop enumerating at this many winners")
    common.add_argument("--time-limit", type=_positive(float), default=None, help="solver time budget in seconds")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=_positive(int), default=1, help="worker processes for corpus commands")
    common.add_argument("--kappa", type=_positive(int), default=None, metavar="L",
                        help="reset committee sizes to max(min(L, |C_t|-1), 1)")

    p = _Parser(prog="egalseq", description="Egalitarian committee sequences over multilevel elections.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="print one winner and its scores")
    s.add_argument("instance")
    s.add_argument("--rule", type=_rule, required=True, help=f"one of {', '.join(RULES)}")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("enumerate", parents=[common], help="print all winners (up to the cap)")
    s.add_argument("instance")
    s.add_argument("--rule", type=_rule, required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("score-table", parents=[common], help="optimality percentages over a corpus")
    s.add_argument("corpus")
    s.add_argument("--rules", type=_rules, default=list(RULES))
    s.add_argument("--out", help="CSV output (default stdout)")
    s.add_argument("--meta", help="write aggregation metadata as JSON")
    s.add_argument("--emit-plot-data", metavar="DIR", help="write runtime series for plotting")
    s.set_defaults(func=cmd_score_table)

    s = sub.add_parser("axiom-scan", parents=[common], help="test one property over a corpus")
    s.add_argument("corpus")
    s.add_argument("--property", required=True, type=str.upper, choices=sorted(PROPERTIES))
    s.add_argument("--rules", type=_rules, default=list(RULES))
    s.add_argument("--greedy-time-limit", type=_positive(float), default=10.0)
    s.add_argument("--max-agents", type=_positive(int), default=120)
    s.add_argument("--max-candidates", type=_positive(int), default=120)
    s.add_argument("--out", help="CSV verdict counts (default stdout)")
    s.add_argument("--summary", help="write discard accounting as JSON")
    s.add_argument("--witnesses", help="write violation witnesses as JSON lines")
    s.set_defaults(func=cmd_axiom_scan)

    s = sub.add_parser("ingest", parents=[common], help="ranked profile plus labels to an election")
    s.add_argument("profile")
    s.add_argument("labels")
    s.add_argument("--class", dest="instance_class", type=str.upper, choices=ingest.CLASSES, default=ingest.APPROVAL2)
    s.add_argument("--out")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("gen", parents=[common], help="generate an instance")
    s.add_argument("generator", choices=["example1", "random", "partition", "binpacking", "vertexcover"])
    s.add_argument("--agents", type=_positive(int), default=4)
    s.add_argument("--levels", type=_positive(int), default=3)
    s.add_argument("--cands", type=_positive(int), default=3)
    s.add_argument("--umax", type=int, default=3)
    s.add_argument("--kmax", type=_positive(int), default=1)
    s.add_argument("--set", type=_ints, default=[1, 1], help="numbers or items, comma separated")
    s.add_argument("--bins", type=_positive(int), default=2)
    s.add_argument("--edges", default="1-2", help="edges like 1-2,2-3")
    s.add_argument("--k", type=_positive(int), default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as stop:
        return stop.code if isinstance(stop.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (OSError, InvalidElection, InvalidSequence, ingest.ProfileError, Infeasible, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DATA
    except (SearchBudgetExceeded, BudgetExceeded, BudgetFailure) as err:
        print(f"budget failure: {err}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
