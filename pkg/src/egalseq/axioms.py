"""Election algebra and per-instance property checks.

Each ``check_*`` function decides, for concrete elections, whether a rule's
complete winner sets meet the condition of one property. Winner sets cut
short by the cap or a time budget never produce a verdict; the check is
reported as skipped instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .model import (
    ALS,
    ASL,
    CommitteeSequence,
    Election,
    InvalidElection,
    Level,
    agent_scores,
)
from .oracle import BudgetExceeded, EnumerationBudget, enumerate_valid_indices
from .rules import EGAL, GREEDY, LEX, RULES, SUM, normalize_rule, winners
from .solver import SolveConfig

P1, P2, P3, P4, P5 = "P1", "P2", "P3", "P4", "P5"
PROPERTIES = {
    P1: "safe concatenation",
    P2: "safe union",
    P3: "sub-consistency",
    P4: "pareto efficiency",
    P5: "independent groups",
}

# rules known to violate each property in general
VIOLATORS = {
    P1: {GREEDY},
    P2: {GREEDY, SUM},
    P3: {ASL, ALS, GREEDY},
    P4: {EGAL, ALS, GREEDY},
    P5: {EGAL, ASL, ALS},
}
SATISFIERS = {p: set(RULES) - v for p, v in VIOLATORS.items()}

HOLDS = "holds"
VIOLATED = "violated"
VACUOUS = "holds-vacuous"
SKIPPED = "skipped"


@dataclass
class AxiomVerdict:
    property: str
    rule: str
    verdict: str
    witness: dict = field(default_factory=dict)
    reason: str = ""

    def __post_init__(self):
        if self.verdict == VIOLATED and not self.witness:
            raise ValueError("a violated verdict needs a witness")

    @property
    def holds(self) -> bool | None:
        if self.verdict == SKIPPED:
            return None
        return self.verdict != VIOLATED


@dataclass(frozen=True)
class Grouping:
    agent_parts: tuple[tuple[str, ...], ...]
    level_cuts: tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.level_cuts)

    def blocks(self) -> list[range]:
        out, lo = [], 0
        for hi in self.level_cuts:
            out.append(range(lo, hi))
            lo = hi
        return out


# -- election algebra -------------------------------------------------------


def concat_elections(e1: Election, e2: Election) -> Election:
    if e1.agents != e2.agents:
        raise InvalidElection("concatenation needs the same agents in the same order")
    return Election(e1.agents, e1.levels + e2.levels, {"source": "concat"})


def union_elections(e1: Election, e2: Election) -> Election:
    """Disjoint electorates over the same number of levels; committee sizes add up.

    Every agent keeps its own utilities and gives zero to candidates that only
    appear in the other election.
    """
    if e1.tau != e2.tau:
        raise InvalidElection(f"union needs equal level counts, got {e1.tau} and {e2.tau}")
    if set(e1.agents) & set(e2.agents):
        raise InvalidElection("union needs disjoint agent sets")
    levels = []
    for l1, l2 in zip(e1.levels, e2.levels):
        cands = l1.candidates + tuple(c for c in l2.candidates if c not in l1.index)
        rows = [tuple(row[l1.index[c]] if c in l1.index else 0 for c in cands) for row in l1.utility]
        rows += [tuple(row[l2.index[c]] if c in l2.index else 0 for c in cands) for row in l2.utility]
        if l1.k + l2.k > len(cands):
            raise InvalidElection("shared candidates leave too few for the summed committee size")
        levels.append(Level(cands, l1.k + l2.k, tuple(rows)))
    return Election(e1.agents + e2.agents, tuple(levels), {"source": "union"})


def stack_elections(e1: Election, e2: Election) -> Election:
    """Disjoint electorates over identical candidates and committee sizes."""
    if e1.tau != e2.tau or e1.kappa != e2.kappa:
        raise InvalidElection("stacking needs equal levels and committee sizes")
    if set(e1.agents) & set(e2.agents):
        raise InvalidElection("stacking needs disjoint agent sets")
    levels = []
    for l1, l2 in zip(e1.levels, e2.levels):
        if set(l1.candidates) != set(l2.candidates):
            raise InvalidElection("stacking needs the same candidates on every level")
        rows = list(l1.utility)
        rows += [tuple(row[l2.index[c]] for c in l1.candidates) for row in l2.utility]
        levels.append(Level(l1.candidates, l1.k, tuple(rows)))
    return Election(e1.agents + e2.agents, tuple(levels), {"source": "stack"})


def prefixed(e: Election, agent_prefix: str, candidate_prefix: str = "") -> Election:
    """Copy of ``e`` with renamed agents (and optionally candidates)."""
    levels = tuple(
        Level(tuple(candidate_prefix + c for c in lev.candidates), lev.k, lev.utility) for lev in e.levels
    )
    return Election(tuple(agent_prefix + a for a in e.agents), levels, dict(e.meta))


def restrict(e: Election, agents, levels) -> Election:
    keep = [e.agent_index(a) for a in agents]
    levs = tuple(
        Level(e.levels[t].candidates, e.levels[t].k, tuple(e.levels[t].utility[i] for i in keep))
        for t in levels
    )
    return Election(tuple(agents), levs, {"source": "restrict"})


def split_agents(e: Election, j: int) -> tuple[Election, Election]:
    return restrict(e, e.agents[:j], range(e.tau)), restrict(e, e.agents[j:], range(e.tau))


def split_levels(e: Election, j: int) -> tuple[Election, Election]:
    return restrict(e, e.agents, range(j)), restrict(e, e.agents, range(j, e.tau))


def glue_groups(e1: Election, e2: Election) -> Election:
    """Place ``e2`` after ``e1`` with disjoint agents, zero utility across blocks."""
    if set(e1.agents) & set(e2.agents):
        raise InvalidElection("glued elections need disjoint agent sets")
    levels = []
    for lev in e1.levels:
        rows = lev.utility + tuple((0,) * len(lev.candidates) for _ in e2.agents)
        levels.append(Level(lev.candidates, lev.k, rows))
    for lev in e2.levels:
        rows = tuple((0,) * len(lev.candidates) for _ in e1.agents) + lev.utility
        levels.append(Level(lev.candidates, lev.k, rows))
    return Election(e1.agents + e2.agents, tuple(levels), {"source": "glue"})


def detect_grouping(e: Election) -> Grouping:
    """Finest split of the levels into contiguous blocks with disjoint supporters.

    A cut after a level is allowed when no agent with positive utility
    before the cut has positive utility after it, and both sides have at
    least one supporter. Agents without any positive utility join block 1.
    The trivial one-block grouping always exists.
    """
    support = [
        {i for i in range(e.n) if any(lev.utility[i])} for lev in e.levels
    ]
    suffix = [set() for _ in range(e.tau + 1)]
    for t in range(e.tau - 1, -1, -1):
        suffix[t] = suffix[t + 1] | support[t]
    cuts = []
    parts = []
    current: set[int] = set()
    for t in range(e.tau):
        current |= support[t]
        if t + 1 < e.tau and current and suffix[t + 1] and not (current & suffix[t + 1]):
            cuts.append(t + 1)
            parts.append(current)
            current = set()
    cuts.append(e.tau)
    parts.append(current)
    idle = set(range(e.n)) - set().union(*parts)
    parts[0] |= idle
    agent_parts = tuple(tuple(e.agents[i] for i in sorted(p)) for p in parts)
    return Grouping(agent_parts, tuple(cuts))


def is_grouping(e: Election, g: Grouping) -> bool:
    seen = [a for part in g.agent_parts for a in part]
    if sorted(seen) != sorted(e.agents) or any(not p for p in g.agent_parts):
        return False
    if list(g.level_cuts) != sorted(set(g.level_cuts)) or (g.level_cuts and g.level_cuts[-1] != e.tau):
        return False
    for part, block in zip(g.agent_parts, g.blocks()):
        inside = {e.agent_index(a) for a in part}
        for t in block:
            for i, row in enumerate(e.levels[t].utility):
                if any(row) and i not in inside:
                    return False
    return True


# -- checks -------------------------------------------------------------------


def _winner_sets(config, *pairs):
    out = []
    for e, rule in pairs:
        w = winners(e, rule, config)
        if not w.complete:
            return None, w.reason or "incomplete"
        out.append(w.winners)
    return out, ""


def _seq(e, x):
    return x.to_lists(e)


def _maxmin(e, seqs):
    best, arg = None, None
    for x in seqs:
        v = min(agent_scores(e, x))
        if best is None or v > best:
            best, arg = v, x
    return best, arg


def check_safe_concatenation(e1: Election, e2: Election, rule: str, config: SolveConfig | None = None) -> AxiomVerdict:
    """Some merged winner is at least as good for the worst-off agent as every glued pair."""
    rule = normalize_rule(rule)
    e = concat_elections(e1, e2)
    sets, why = _winner_sets(config, (e1, rule), (e2, rule), (e, rule))
    if sets is None:
        return AxiomVerdict(P1, rule, SKIPPED, reason=why)
    w1, w2, w = sets
    merged, mx = _maxmin(e, w)
    pairs, px = _maxmin(e, (x1.concat(x2) for x1, x2 in product(w1, w2)))
    if merged >= pairs:
        return AxiomVerdict(P1, rule, HOLDS)
    return AxiomVerdict(P1, rule, VIOLATED, {
        "merged_best": _seq(e, mx), "merged_value": merged,
        "pair": _seq(e, px), "pair_value": pairs,
    })


def check_safe_union(e1: Election, e2: Election, rule: str, config: SolveConfig | None = None) -> AxiomVerdict:
    rule = normalize_rule(rule)
    e = union_elections(e1, e2)
    sets, why = _winner_sets(config, (e1, rule), (e2, rule), (e, rule))
    if sets is None:
        return AxiomVerdict(P2, rule, SKIPPED, reason=why)
    w1, w2, w = sets
    merged, mx = _maxmin(e, w)
    pairs, px = _maxmin(e, (x1.union(x2) for x1, x2 in product(w1, w2)))
    if merged >= pairs:
        return AxiomVerdict(P2, rule, HOLDS)
    return AxiomVerdict(P2, rule, VIOLATED, {
        "merged_best": _seq(e, mx), "merged_value": merged,
        "pair": _seq(e, px), "pair_value": pairs,
    })


def check_sub_consistency(e1: Election, e2: Election, rule: str, config: SolveConfig | None = None) -> AxiomVerdict:
    rule = normalize_rule(rule)
    e = stack_elections(e1, e2)
    sets, why = _winner_sets(config, (e1, rule), (e2, rule), (e, rule))
    if sets is None:
        return AxiomVerdict(P3, rule, SKIPPED, reason=why)
    w1, w2, w = sets
    common = [x for x in w1 if x in set(w2)]
    if not common:
        return AxiomVerdict(P3, rule, VACUOUS)
    merged = set(w)
    missing = [x for x in common if x not in merged]
    if not missing:
        return AxiomVerdict(P3, rule, HOLDS)
    return AxiomVerdict(P3, rule, VIOLATED, {
        "common_winner": _seq(e, missing[0]),
        "merged_winners": [_seq(e, x) for x in w],
    })


def check_pareto(e: Election, rule: str, config: SolveConfig | None = None,
                 budget: EnumerationBudget | None = None) -> AxiomVerdict:
    rule = normalize_rule(rule)
    sets, why = _winner_sets(config, (e, rule))
    if sets is None:
        return AxiomVerdict(P4, rule, SKIPPED, reason=why)
    (w,) = sets
    targets = [(x, agent_scores(e, x)) for x in w]
    try:
        for idx in enumerate_valid_indices(e, budget):
            scores = [0] * e.n
            for lev, committee in zip(e.levels, idx):
                for i, row in enumerate(lev.utility):
                    scores[i] += sum(row[j] for j in committee)
            for x, sx in targets:
                if all(a >= b for a, b in zip(scores, sx)) and scores != sx:
                    return AxiomVerdict(P4, rule, VIOLATED, {
                        "dominated": _seq(e, x), "dominating": _seq(e, e.sequence(idx)),
                    })
    except BudgetExceeded as err:
        return AxiomVerdict(P4, rule, SKIPPED, reason=str(err))
    return AxiomVerdict(P4, rule, HOLDS)


def check_independent_groups(e: Election, rule: str, config: SolveConfig | None = None,
                             grouping: Grouping | None = None) -> AxiomVerdict:
    rule = normalize_rule(rule)
    g = grouping or detect_grouping(e)
    if g.r < 2:
        return AxiomVerdict(P5, rule, SKIPPED, reason="trivial grouping")
    subs = [restrict(e, part, block) for part, block in zip(g.agent_parts, g.blocks())]
    sets, why = _winner_sets(config, (e, rule), *((s, rule) for s in subs))
    if sets is None:
        return AxiomVerdict(P5, rule, SKIPPED, reason=why)
    whole, parts = sets[0], sets[1:]
    combined = set()
    for combo in product(*parts):
        seq = combo[0]
        for x in combo[1:]:
            seq = seq.concat(x)
        combined.add(seq)
    if combined == set(whole):
        return AxiomVerdict(P5, rule, HOLDS)
    extra = sorted((x for x in whole if x not in combined), key=e.canonical_key)
    missing = sorted((x for x in combined if x not in set(whole)), key=e.canonical_key)
    return AxiomVerdict(P5, rule, VIOLATED, {
        "cuts": list(g.level_cuts),
        "only_in_whole": [_seq(e, x) for x in extra],
        "only_in_product": [_seq(e, x) for x in missing],
    })


CHECKS = {
    P1: check_safe_concatenation,
    P2: check_safe_union,
    P3: check_sub_consistency,
    P4: check_pareto,
    P5: check_independent_groups,
}


def verdict_row(v: AxiomVerdict, instance_ids) -> dict:
    """Row form used by the axiom scan output."""
    return {
        "instances": list(instance_ids),
        "rule": v.rule,
        "property": v.property,
        "verdict": v.verdict,
        "reason": v.reason,
        "witness": v.witness or None,
    }


def literal_safe_merge(e1, e2, rule, merge_elections, merge_sequences, config=None) -> bool | None:
    """The for-all/exists statement of the safeness properties, evaluated pair by pair."""
    rule = normalize_rule(rule)
    e = merge_elections(e1, e2)
    sets, _ = _winner_sets(config, (e1, rule), (e2, rule), (e, rule))
    if sets is None:
        return None
    w1, w2, w = sets
    for x1, x2 in product(w1, w2):
        target = min(agent_scores(e, merge_sequences(x1, x2)))
        if not any(min(agent_scores(e, x)) >= target for x in w):
            return False
    return True


__all__ = [
    "AxiomVerdict", "Grouping", "PROPERTIES", "VIOLATORS", "SATISFIERS", "CHECKS",
    "concat_elections", "union_elections", "stack_elections", "glue_groups", "restrict",
    "split_agents", "split_levels", "prefixed", "detect_grouping", "is_grouping",
    "check_safe_concatenation", "check_safe_union", "check_sub_consistency",
    "check_pareto", "check_independent_groups", "verdict_row", "literal_safe_merge",
    "CommitteeSequence", "LEX",
]
