"""Brute-force reference semantics and instance generators.

Everything here scans the full set of valid committee sequences, so it is
only usable on small elections. It is the ground truth the solver, the
rules and the property checkers are tested against, and it deliberately
shares no search code with them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from math import prod, comb
from typing import Iterator

from .model import (
    ALS,
    ASL,
    CommitteeSequence,
    Election,
    Level,
    agent_scores,
    compute_weights,
    lex_score_exact,
    score_triple,
    weighted_value,
)

DEFAULT_MAX_SEQUENCES = 10**6


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationBudget:
    max_sequences: int = DEFAULT_MAX_SEQUENCES
    on_exceed: str = "error"  # or "truncate"

    def __post_init__(self):
        if self.max_sequences < 1:
            raise ValueError("max_sequences must be at least 1")
        if self.on_exceed not in ("error", "truncate"):
            raise ValueError(f"on_exceed must be 'error' or 'truncate', not {self.on_exceed!r}")


def count_valid(e: Election) -> int:
    return prod(comb(len(lev.candidates), lev.k) for lev in e.levels)


def enumerate_valid_indices(e: Election, budget: EnumerationBudget | None = None) -> Iterator[tuple]:
    budget = budget or EnumerationBudget()
    if budget.on_exceed == "error" and count_valid(e) > budget.max_sequences:
        raise BudgetExceeded(
            f"{count_valid(e)} valid sequences exceed the budget of {budget.max_sequences}"
        )
    per_level = [combinations(range(len(lev.candidates)), lev.k) for lev in e.levels]
    for i, idx in enumerate(product(*per_level)):
        if i >= budget.max_sequences:
            return
        yield idx


def enumerate_valid(e: Election, budget: EnumerationBudget | None = None) -> Iterator[CommitteeSequence]:
    """All valid sequences in canonical order (levels in order, combinations lexicographic)."""
    for idx in enumerate_valid_indices(e, budget):
        yield e.sequence(idx)


def _argbest(e: Election, key, budget, maximize=True) -> list[CommitteeSequence]:
    best = None
    winners: list[CommitteeSequence] = []
    for x in enumerate_valid(e, budget):
        v = key(x)
        if best is None or (v > best if maximize else v < best):
            best, winners = v, [x]
        elif v == best:
            winners.append(x)
    return winners


def sum_committees(lev: Level) -> list[tuple[int, ...]]:
    """All k-subsets of a level with maximal utility sum, by enumeration."""
    cols = lev.column_sums()
    best, out = None, []
    for c in combinations(range(len(lev.candidates)), lev.k):
        v = sum(cols[j] for j in c)
        if best is None or v > best:
            best, out = v, [c]
        elif v == best:
            out.append(c)
    return out


def brute_rule(e: Election, rule: str, budget: EnumerationBudget | None = None) -> list[CommitteeSequence]:
    """Full winner set of ``rule``, canonically ordered."""
    rule = rule.upper()
    if rule == "SUM":
        return [e.sequence(idx) for idx in product(*(sum_committees(lev) for lev in e.levels))]
    if rule == "EGAL":
        return _argbest(e, lambda x: min(agent_scores(e, x)), budget)
    if rule in (ALS, ASL):
        w = compute_weights(e)
        return _argbest(e, lambda x: weighted_value(score_triple(e, x), w, rule), budget)
    if rule == "LEX":
        return _argbest(e, lambda x: lex_score_exact(e, x), budget, maximize=False)
    if rule == "GREEDY":
        return brute_greedy_all(e)
    raise ValueError(f"unknown rule {rule!r}")


def two_stage_filter(e: Election, order: str, budget: EnumerationBudget | None = None) -> list[CommitteeSequence]:
    """Egalitarian winners narrowed by explicit secondary then tertiary maximization.

    ALS keeps the maximal level score first, then the maximal sum score;
    ASL swaps the two stages.
    """
    egal = brute_rule(e, "EGAL", budget)
    triples = {x: score_triple(e, x) for x in egal}
    first, second = ("level_min", "total") if order == ALS else ("total", "level_min")
    best1 = max(getattr(s, first) for s in triples.values())
    stage = [x for x in egal if getattr(triples[x], first) == best1]
    best2 = max(getattr(triples[x], second) for x in stage)
    return [x for x in stage if getattr(triples[x], second) == best2]


def dominates(e: Election, x: CommitteeSequence, y: CommitteeSequence) -> bool:
    sx, sy = agent_scores(e, x), agent_scores(e, y)
    return all(a >= b for a, b in zip(sx, sy)) and any(a > b for a, b in zip(sx, sy))


def brute_greedy_all(e: Election) -> list[CommitteeSequence]:
    """Every outcome of the greedy rule under every tie-breaking.

    Follows the rule's definition literally, comparing candidate insertions
    by the exact integer lex score and exploring all minimizers without any
    caching. Outputs are padded to full size with the level's first
    zero-utility candidates.
    """
    plus = []
    ks = []
    for lev in e.levels:
        cols = lev.column_sums()
        pos = [j for j, s in enumerate(cols) if s > 0]
        plus.append(pos)
        ks.append(min(lev.k, len(pos)))
    start = tuple(frozenset(p) if len(p) == k else frozenset() for p, k in zip(plus, ks))
    leaves = set()

    def walk(state):
        open_levels = [t for t in range(e.tau) if len(state[t]) < ks[t]]
        if not open_levels:
            leaves.add(state)
            return
        options = []
        for t in open_levels:
            for c in plus[t]:
                if c not in state[t]:
                    nxt = state[:t] + (state[t] | {c},) + state[t + 1:]
                    options.append((lex_score_exact(e, e.sequence(nxt)), nxt))
        best = min(v for v, _ in options)
        for v, nxt in options:
            if v == best:
                walk(nxt)

    walk(start)
    out = []
    for state in leaves:
        idx = []
        for t, lev in enumerate(e.levels):
            chosen = set(state[t])
            zeros = [j for j in range(len(lev.candidates)) if j not in plus[t]]
            chosen.update(zeros[: lev.k - len(chosen)])
            idx.append(tuple(sorted(chosen)))
        out.append(tuple(idx))
    return [e.sequence(idx) for idx in sorted(set(out))]


# -- instance generators --------------------------------------------------


def gen_example1() -> Election:
    """Four friends planning breakfast, lunch and dinner, two options each."""
    agents = ("Ben", "Dora", "Eric", "Fina")
    table = [
        # breakfast, lunch, dinner (opt1, opt2 each)
        [(0, 0), (2, 1), (2, 1)],
        [(3, 0), (3, 0), (1, 2)],
        [(3, 0), (3, 0), (1, 2)],
        [(0, 3), (0, 3), (0, 0)],
    ]
    levels = []
    for t, meal in enumerate(("breakfast", "lunch", "dinner")):
        levels.append(
            Level((f"{meal}-opt1", f"{meal}-opt2"), 1, tuple(row[t] for row in table))
        )
    return Election(agents, tuple(levels), {"source": "example1"})


def gen_partition_instance(numbers) -> Election:
    numbers = list(numbers)
    if not numbers or any(x <= 0 for x in numbers):
        raise ValueError("partition gadget needs a nonempty multiset of positive integers")
    levels = [Level(("c1", "c2"), 1, ((x, 0), (0, x))) for x in numbers]
    return Election(("a1", "a2"), tuple(levels), {"source": "partition", "class": "gadget"})


def partition_threshold(numbers) -> tuple[int, int]:
    """The winning threshold sum/2 as a fraction (numerator, denominator)."""
    return sum(numbers), 2


def gen_binpacking_instance(items, k: int) -> Election:
    items = list(items)
    if not items or k < 1 or any(x <= 0 for x in items):
        raise ValueError("bin packing gadget needs positive items and k >= 1")
    big = 1 + sum(items)
    cands = tuple(f"c{j + 1}" for j in range(k))
    levels = []
    for x in items:
        util = tuple(tuple(big - x if i == j else big for j in range(k)) for i in range(k))
        levels.append(Level(cands, 1, util))
    agents = tuple(f"a{i + 1}" for i in range(k))
    return Election(agents, tuple(levels), {"source": "binpacking", "class": "gadget"})


def binpacking_threshold(items, capacity: int) -> int:
    """Minimum agent score reached exactly when the items fit into bins of ``capacity``."""
    return len(items) * (1 + sum(items)) - capacity


def gen_vertexcover_instance(edges, k: int, vertices=None) -> Election:
    edges = [tuple(e) for e in edges]
    if not edges:
        raise ValueError("vertex cover gadget needs at least one edge")
    if vertices is None:
        vertices = sorted({v for e in edges for v in e})
    vertices = [str(v) for v in vertices]
    util = tuple(tuple(1 if v in map(str, e) else 0 for v in vertices) for e in edges)
    agents = tuple(f"e{i + 1}" for i in range(len(edges)))
    return Election(agents, (Level(tuple(vertices), k, util),), {"source": "vertexcover", "class": "gadget"})


VERTEX_COVER_THRESHOLD = 1
