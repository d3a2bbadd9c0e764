"""The five rules plus the plain egalitarian baseline.

``SUM`` and ``GREEDY`` run in polynomial time; ``EGAL``, ``ALS``, ``ASL`` and
``LEX`` are handed to the branch-and-bound solver.
"""

from __future__ import annotations

import time
from itertools import combinations, islice, product

from .model import ALS, ASL, CommitteeSequence, Election, Level
from .solver import Objective, SolveConfig, WinnerSet, solve_all, solve_one

SUM = "SUM"
GREEDY = "GREEDY"
EGAL = "EGAL"
LEX = "LEX"
RULES = (SUM, GREEDY, EGAL, ALS, ASL, LEX)
EXACT_RULES = (EGAL, ALS, ASL, LEX)


def normalize_rule(rule: str) -> str:
    r = rule.upper().replace("-", "").replace("_", "")
    aliases = {"A": EGAL, "EGALITARIAN": EGAL, "SIGMA": SUM, "ALSIGMA": ALS, "ASIGMAL": ASL}
    r = aliases.get(r, r)
    if r not in RULES:
        raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")
    return r


# -- sum rule ---------------------------------------------------------------


def sum_level_winners(lev: Level) -> list[tuple[int, ...]]:
    """All k-subsets of ``lev`` with maximal utility sum, in canonical order.

    Candidates strictly above the k-th largest column sum are always in;
    the remaining slots are filled by every combination of the candidates
    tied at that boundary value.
    """
    if lev.k == 0:
        return [()]
    cols = lev.column_sums()
    boundary = sorted(cols, reverse=True)[lev.k - 1]
    sure = [j for j, c in enumerate(cols) if c > boundary]
    tied = [j for j, c in enumerate(cols) if c == boundary]
    return sorted(tuple(sorted(sure + list(extra))) for extra in combinations(tied, lev.k - len(sure)))


def rule_sum_single(e: Election) -> CommitteeSequence:
    """Per level the k top-sum candidates, ties going to the earlier candidate."""
    idx = []
    for lev in e.levels:
        cols = lev.column_sums()
        order = sorted(range(len(cols)), key=lambda j: (-cols[j], j))
        idx.append(tuple(sorted(order[: lev.k])))
    return e.sequence(idx)


def rule_sum(e: Election, config: SolveConfig | None = None) -> WinnerSet:
    cap = (config or SolveConfig()).winner_cap
    per_level = [sum_level_winners(lev) for lev in e.levels]
    total = 1
    for p in per_level:
        total *= len(p)
    winners = [e.sequence(idx) for idx in islice(product(*per_level), cap)]
    complete = total < cap
    return WinnerSet(winners, complete, "" if complete else "cap", {"size": total})


# -- greedy rule --------------------------------------------------------------


def _hist_delta(scores, entries):
    delta: dict[int, int] = {}
    for i, u in entries:
        s = scores[i]
        delta[s] = delta.get(s, 0) - 1
        delta[s + u] = delta.get(s + u, 0) + 1
    return {v: d for v, d in delta.items() if d}


def _cmp_delta(d1, d2) -> int:
    """Compare base+d1 against base+d2 as satisfaction histograms."""
    for v in sorted(set(d1) | set(d2)):
        a, b = d1.get(v, 0), d2.get(v, 0)
        if a != b:
            return -1 if a < b else 1
    return 0


class _Greedy:
    def __init__(self, e: Election):
        self.e = e
        n = e.n
        self.plus = []
        self.ks = []
        self.entries = []
        for lev in e.levels:
            m_t = len(lev.candidates)
            entries = [[(i, lev.utility[i][j]) for i in range(n) if lev.utility[i][j]] for j in range(m_t)]
            pos = [j for j in range(m_t) if entries[j]]
            self.entries.append(entries)
            self.plus.append(pos)
            self.ks.append(min(lev.k, len(pos)))
        self.start = tuple(
            frozenset(p) if len(p) == k else frozenset() for p, k in zip(self.plus, self.ks)
        )
        self.stats = {"steps": 0, "insertions": 0, "score_updates": 0}

    def scores(self, state):
        scores = [0] * self.e.n
        for t, committee in enumerate(state):
            for j in committee:
                for i, u in self.entries[t][j]:
                    scores[i] += u
        return scores

    def options(self, state, scores):
        """Best insertions, as (level, candidate) pairs in canonical order."""
        best = None
        out = []
        for t in range(self.e.tau):
            if len(state[t]) >= self.ks[t]:
                continue
            for j in self.plus[t]:
                if j in state[t]:
                    continue
                entries = self.entries[t][j]
                self.stats["insertions"] += 1
                self.stats["score_updates"] += len(entries)
                d = _hist_delta(scores, entries)
                c = -1 if best is None else _cmp_delta(d, best)
                if c < 0:
                    best, out = d, [(t, j)]
                elif c == 0:
                    out.append((t, j))
        return out

    def pad(self, state) -> tuple[tuple[int, ...], ...]:
        idx = []
        for t, lev in enumerate(self.e.levels):
            chosen = set(state[t])
            plus = set(self.plus[t])
            zeros = [j for j in range(len(lev.candidates)) if j not in plus]
            chosen.update(zeros[: lev.k - len(chosen)])
            idx.append(tuple(sorted(chosen)))
        return tuple(idx)


def rule_greedy(e: Election, pad: bool = True, stats: dict | None = None) -> CommitteeSequence:
    """The greedy rule with canonical tie-breaking (earliest level, then earliest candidate).

    With ``pad=False`` the committees are returned exactly as the greedy
    procedure leaves them, possibly smaller than k on levels with too few
    positively supported candidates.
    """
    g = _Greedy(e)
    state = list(g.start)
    scores = g.scores(state)
    while True:
        opts = g.options(state, scores)
        if not opts:
            break
        t, j = opts[0]
        g.stats["steps"] += 1
        state[t] = state[t] | {j}
        for i, u in g.entries[t][j]:
            scores[i] += u
    if stats is not None:
        stats.update(g.stats)
        stats["preseeded"] = sum(len(s) for s in g.start)
    if pad:
        return e.sequence(g.pad(state))
    return e.sequence(tuple(sorted(s)) for s in state)


def rule_greedy_all(e: Election, config: SolveConfig | None = None) -> WinnerSet:
    """Every sequence the greedy rule reaches under some tie-breaking.

    Depth-first over the greedy decision tree; incomplete states already
    expanded are cached by their (unordered) committees.
    """
    config = config or SolveConfig()
    g = _Greedy(e)
    started = time.perf_counter()
    seen = set()
    leaves = set()
    reason = ""
    stack = [g.start]
    while stack:
        if config.time_budget is not None and time.perf_counter() - started > config.time_budget:
            reason = "time"
            break
        state = stack.pop()
        if state in seen:
            continue
        opts = g.options(state, g.scores(state))
        if not opts:
            leaves.add(g.pad(state))
            if len(leaves) >= config.winner_cap:
                reason = "cap"
                break
            continue
        seen.add(state)
        children = []
        for t, j in opts:
            child = state[:t] + (state[t] | {j},) + state[t + 1:]
            if child not in seen:
                children.append(child)
        stack.extend(reversed(children))
    winners = [e.sequence(idx) for idx in sorted(leaves)]
    stats = {"elapsed": time.perf_counter() - started, "states": len(seen)}
    return WinnerSet(winners, not reason, reason, stats)


# -- exact rules ------------------------------------------------------------


def rule_exact(e: Election, rule: str, config: SolveConfig | None = None, **objective_kw) -> WinnerSet:
    rule = normalize_rule(rule)
    if rule not in EXACT_RULES:
        raise ValueError(f"{rule} is not an exact rule")
    return solve_all(e, Objective.for_rule(rule, **objective_kw), config)


def winners(e: Election, rule: str, config: SolveConfig | None = None) -> WinnerSet:
    """Full winner set of any rule (capped by ``config.winner_cap``)."""
    rule = normalize_rule(rule)
    if rule == SUM:
        return rule_sum(e, config)
    if rule == GREEDY:
        return rule_greedy_all(e, config)
    return rule_exact(e, rule, config)


def single_winner(e: Election, rule: str, config: SolveConfig | None = None) -> CommitteeSequence:
    """The designated deterministic winner of ``rule``."""
    rule = normalize_rule(rule)
    if rule == SUM:
        return rule_sum_single(e)
    if rule == GREEDY:
        return rule_greedy(e)
    return solve_one(e, Objective.for_rule(rule), config).sequence

