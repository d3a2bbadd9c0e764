"""Experiment runner: random instances, score tables and axiom scans."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import axioms
from .model import (
    Election,
    Level,
    agent_scores,
    lex_score_exact,
    read_election,
    sat_histogram,
    score_triple,
)
from .oracle import BudgetExceeded
from .rules import EGAL, GREEDY, LEX, RULES, SUM, normalize_rule, rule_greedy_all, single_winner, winners
from .solver import SearchBudgetExceeded, SolveConfig

SCORES = ("lex", "agent_min", "level_min", "sum")


# -- instances ------------------------------------------------------------------


def random_election(rng: random.Random, agents: int, levels: int, cands: int, umax: int,
                    kmax: int = 1, zero_prob: float = 0.0) -> Election:
    """Uniform utilities in 0..umax, each entry zeroed with probability ``zero_prob``.

    Committee sizes are drawn from 1..min(kmax, cands).
    """
    if min(agents, levels, cands, kmax) < 1 or umax < 0 or not 0 <= zero_prob <= 1:
        raise ValueError("random election parameters out of range")
    levs = []
    for t in range(levels):
        util = tuple(
            tuple(0 if rng.random() < zero_prob else rng.randint(0, umax) for _ in range(cands))
            for _ in range(agents)
        )
        k = rng.randint(1, min(kmax, cands))
        levs.append(Level(tuple(f"l{t + 1}c{j + 1}" for j in range(cands)), k, util))
    meta = {"source": "random", "class": "random"}
    return Election(tuple(f"a{i + 1}" for i in range(agents)), tuple(levs), meta)


def load_corpus(directory: str | Path) -> list[tuple[str, Election]]:
    """All ``*.json`` elections of a directory, sorted by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"corpus directory {directory} does not exist")
    files = sorted(directory.glob("*.json"))
    return [(f.name, read_election(f)) for f in files]


def _map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# -- score table --------------------------------------------------------------


def natural_round(x, places: int = 1) -> float:
    """Round a nonnegative number half up, exactly."""
    scaled = Fraction(x) * 10**places
    q, r = divmod(scaled.numerator, scaled.denominator)
    if 2 * r >= scaled.denominator:
        q += 1
    return q / 10**places


def _ratio(achieved, optimum) -> Fraction:
    if optimum == 0:
        return Fraction(1) if achieved == 0 else Fraction(0)
    return Fraction(achieved, optimum)


def instance_scores(e: Election, rules, config: SolveConfig | None = None) -> dict:
    """Scores of each rule's designated winner next to the per-score optimum."""
    config = config or SolveConfig()
    out = {"rules": {}, "runtime": {}}
    for rule in rules:
        started = time.perf_counter()
        x = single_winner(e, rule, config)
        out["runtime"][rule] = time.perf_counter() - started
        tri = score_triple(e, x)
        out["rules"][rule] = {
            "lex": lex_score_exact(e, x),
            "hist": list(sat_histogram(e, x).counts),
            "agent_min": tri.agent_min,
            "level_min": tri.level_min,
            "sum": tri.total,
        }
    if LEX in out["rules"]:
        opt_lex = out["rules"][LEX]["lex"]
    else:
        opt_lex = lex_score_exact(e, single_winner(e, LEX, config))
    opt_sum = score_triple(e, single_winner(e, SUM, config))
    out["optimum"] = {
        "lex": opt_lex,
        "agent_min": min(agent_scores(e, single_winner(e, EGAL, config))),
        "level_min": opt_sum.level_min,
        "sum": opt_sum.total,
    }
    return out


def _score_job(args):
    name, e, rules, config = args
    try:
        return name, instance_scores(e, rules, config), ""
    except (SearchBudgetExceeded, BudgetExceeded) as err:
        return name, None, f"budget: {err}"


@dataclass
class ScoreTable:
    rows: dict
    instances: int
    failures: dict = field(default_factory=dict)
    per_instance: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["rule"]
        for s in SCORES:
            header += [f"{s}_optimal_pct", f"{s}_mean_pct"]
        w.writerow(header)
        for rule, row in self.rows.items():
            line = [rule]
            for s in SCORES:
                line += [row[s]["optimal_pct"], row[s]["mean_pct"]]
            w.writerow(line)
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "instances": self.instances,
            "failures": self.failures,
            "zero_optimum": "ratio counts as 100% when the rule also reaches 0",
            "lex_ratio": "optimal lex value divided by the rule's lex value",
            "rounding": "half up, one decimal",
        }


def score_table(corpus, rules=RULES, config: SolveConfig | None = None, jobs: int = 1) -> ScoreTable:
    """Percent of instances where each rule is optimal, and its mean percent of the optimum."""
    if not corpus:
        raise ValueError("empty corpus")
    rules = [normalize_rule(r) for r in rules]
    results = _map(_score_job, [(name, e, rules, config) for name, e in corpus], jobs)
    hits = defaultdict(Counter)
    ratios = defaultdict(lambda: defaultdict(list))
    failures = {}
    per_instance = []
    for name, res, err in results:
        if res is None:
            failures[name] = err
            continue
        per_instance.append((name, res))
        opt = res["optimum"]
        for rule in rules:
            got = res["rules"][rule]
            for s in SCORES:
                if s == "lex":
                    ok = got["lex"] == opt["lex"]
                    ratios[rule][s].append(Fraction(opt["lex"], got["lex"]))
                else:
                    ok = got[s] == opt[s]
                    ratios[rule][s].append(_ratio(got[s], opt[s]))
                hits[rule][s] += ok
    done = len(per_instance)
    if done == 0:
        raise ValueError("no instance could be solved")
    rows = {}
    for rule in rules:
        rows[rule] = {
            s: {
                "optimal_pct": natural_round(Fraction(100 * hits[rule][s], done)),
                "mean_pct": natural_round(100 * sum(ratios[rule][s]) / done),
            }
            for s in SCORES
        }
    return ScoreTable(rows, done, failures, per_instance)


def plot_series(table: ScoreTable, corpus) -> dict[str, list[tuple[int, float]]]:
    """Runtime against instance size (n times m) per rule, for external plotting."""
    size = {name: e.n * e.m for name, e in corpus}
    series = defaultdict(list)
    for name, res in table.per_instance:
        for rule, secs in res["runtime"].items():
            series[rule].append((size[name], secs))
    return {r: sorted(v) for r, v in series.items()}


# -- axiom scans ----------------------------------------------------------------


@dataclass(frozen=True)
class DiscardPolicy:
    greedy_all_time_limit: float = 10.0
    winner_cap: int = 30
    max_agents: int = 120
    max_candidates: int = 120
    solver_time_limit: float | None = None
    pair_window: int = 10

    def __post_init__(self):
        for name in ("greedy_all_time_limit", "winner_cap", "max_agents", "max_candidates", "pair_window"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.solver_time_limit is not None and self.solver_time_limit <= 0:
            raise ValueError("solver_time_limit must be positive")

    def config(self) -> SolveConfig:
        return SolveConfig(winner_cap=self.winner_cap, time_budget=self.solver_time_limit)


def main_discard(e: Election, prop: str, policy: DiscardPolicy) -> str:
    """'C1', 'C2', 'other' or '' (kept) under the main discard conditions."""
    violators = axioms.VIOLATORS[prop]
    results = []
    if GREEDY in violators:
        cfg = SolveConfig(winner_cap=policy.winner_cap, time_budget=policy.greedy_all_time_limit)
        res = rule_greedy_all(e, cfg)
        if res.reason == "time":
            return "C1"
        results.append(res)
    config = policy.config()
    for rule in sorted(violators - {GREEDY}):
        try:
            results.append(winners(e, rule, config))
        except SearchBudgetExceeded:
            return "other"
    if any(res.reason == "cap" for res in results):
        return "C2"
    if not all(res.complete for res in results):
        return "other"
    return ""


def too_large(e: Election, policy: DiscardPolicy) -> bool:
    return e.n > policy.max_agents or e.m > policy.max_candidates


def degenerate(e: Election) -> bool:
    """Some level where no candidate gets utility at least one from anybody."""
    return any(max(max(row) for row in lev.utility) < 1 for lev in e.levels)


@dataclass
class Unit:
    ids: tuple[str, ...]
    kind: str
    elections: tuple[Election, ...]


def _filter(corpus, prop, policy, sized):
    kept, counts = [], Counter()
    for name, e in corpus:
        if sized and too_large(e, policy):
            counts["size"] += 1
            continue
        why = main_discard(e, prop, policy)
        if why:
            counts[why] += 1
            continue
        kept.append((name, e))
    return kept, counts


def generate_units(corpus, prop: str, policy: DiscardPolicy):
    """Instances, pairs, splits or glued instances to test, per the scan protocol.

    Returns the units plus the counts of corpus instances filtered out before
    unit generation.
    """
    sized = prop in (axioms.P3, axioms.P5)
    kept, pre = _filter(corpus, prop, policy, sized)
    units: list[Unit] = []
    if prop == axioms.P4:
        units = [Unit((name,), "instance", (e,)) for name, e in kept]
    elif prop == axioms.P2:
        by_tau = defaultdict(list)
        for name, e in kept:
            by_tau[e.tau].append((name, e))
        for tau in sorted(by_tau):
            part = by_tau[tau]
            for i, (n1, e1) in enumerate(part):
                for n2, e2 in part[i + 1:i + 1 + policy.pair_window]:
                    units.append(Unit((n1, n2), "pair", (axioms.prefixed(e1, "x:", "x:"), axioms.prefixed(e2, "y:", "y:"))))
    elif prop in (axioms.P1, axioms.P3):
        split = axioms.split_levels if prop == axioms.P1 else axioms.split_agents
        for name, e in kept:
            cuts = range(1, e.tau) if prop == axioms.P1 else range(1, e.n)
            for j in cuts:
                units.append(Unit((name, f"cut={j}"), "split", split(e, j)))
    elif prop == axioms.P5:
        for i in range(len(kept) - 1):
            n1, e1 = kept[i]
            n2, e2 = kept[i + 1]
            g1 = axioms.glue_groups(axioms.prefixed(e1, "g1:"), axioms.prefixed(e2, "g2:"))
            units.append(Unit((n1, n2), "glue2", (g1,)))
            if i + 2 < len(kept):
                n3, e3 = kept[i + 2]
                g2 = axioms.glue_groups(g1, axioms.prefixed(e3, "g3:"))
                units.append(Unit((n1, n2, n3), "glue3", (g2,)))
    else:
        raise ValueError(f"unknown property {prop!r}")
    return units, pre


def _merged(unit: Unit, prop: str) -> Election:
    if prop == axioms.P2:
        return axioms.union_elections(*unit.elections)
    if prop == axioms.P1:
        return axioms.concat_elections(*unit.elections)
    if prop == axioms.P3:
        return axioms.stack_elections(*unit.elections)
    return unit.elections[0]


def evaluate_unit(args) -> dict:
    unit, prop, rules, policy = args
    sized = prop in (axioms.P3, axioms.P5)
    if prop in (axioms.P1, axioms.P3) and any(degenerate(x) for x in unit.elections):
        return {"ids": unit.ids, "discard": "degenerate"}
    if prop == axioms.P5 and too_large(unit.elections[0], policy):
        return {"ids": unit.ids, "discard": "size"}
    # the split units' merged election already passed the instance filter
    to_check = list(unit.elections) if prop in (axioms.P1, axioms.P3) else [_merged(unit, prop)]
    for e in to_check:
        if sized and too_large(e, policy):
            return {"ids": unit.ids, "discard": "size"}
        why = main_discard(e, prop, policy)
        if why:
            return {"ids": unit.ids, "discard": why}
    config = policy.config()
    check = axioms.CHECKS[prop]
    rows = []
    for rule in rules:
        try:
            v = check(*unit.elections, rule, config)
        except (SearchBudgetExceeded, BudgetExceeded) as err:
            v = axioms.AxiomVerdict(prop, rule, axioms.SKIPPED, reason=f"budget: {err}")
        rows.append(axioms.verdict_row(v, unit.ids))
    return {"ids": unit.ids, "discard": "", "rows": rows}


@dataclass
class ScanReport:
    property: str
    policy: DiscardPolicy
    instance_filter: dict
    units: int
    considered: int
    discarded: dict
    verdicts: dict
    rows: list

    def accounting_ok(self) -> bool:
        return self.considered + sum(self.discarded.values()) == self.units

    def summary(self) -> dict:
        return {
            "property": self.property,
            "name": axioms.PROPERTIES[self.property],
            "policy": asdict(self.policy),
            "instances_filtered": self.instance_filter,
            "units": self.units,
            "considered": self.considered,
            "discarded": self.discarded,
            "verdicts": self.verdicts,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rule", "considered", "satisfied", "satisfied_vacuous", "violated", "skipped"])
        for rule, c in self.verdicts.items():
            w.writerow([rule, self.considered, c.get(axioms.HOLDS, 0), c.get(axioms.VACUOUS, 0),
                        c.get(axioms.VIOLATED, 0), c.get(axioms.SKIPPED, 0)])
        return buf.getvalue()

    def witnesses_jsonl(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.rows if r["verdict"] == axioms.VIOLATED)


def axiom_scan(corpus, prop: str, rules=RULES, policy: DiscardPolicy | None = None, jobs: int = 1) -> ScanReport:
    policy = policy or DiscardPolicy()
    prop = prop.upper()
    if prop not in axioms.PROPERTIES:
        raise ValueError(f"unknown property {prop!r}")
    rules = [normalize_rule(r) for r in rules]
    units, pre = generate_units(corpus, prop, policy)
    results = _map(evaluate_unit, [(u, prop, rules, policy) for u in units], jobs)
    discarded = Counter({"C1": 0, "C2": 0, "size": 0, "degenerate": 0, "other": 0})
    verdicts = {r: Counter() for r in rules}
    rows = []
    considered = 0
    for res in results:
        if res["discard"]:
            discarded[res["discard"]] += 1
            continue
        considered += 1
        for row in res["rows"]:
            verdicts[row["rule"]][row["verdict"]] += 1
            rows.append(row)
    return ScanReport(prop, policy, dict(pre), len(units), considered, dict(discarded),
                      {r: dict(c) for r, c in verdicts.items()}, rows)


__all__ = [
    "random_election", "load_corpus", "natural_round", "instance_scores", "score_table",
    "ScoreTable", "plot_series", "DiscardPolicy", "main_discard", "too_large", "degenerate",
    "generate_units", "evaluate_unit", "axiom_scan", "ScanReport",
]
