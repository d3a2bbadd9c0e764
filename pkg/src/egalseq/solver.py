"""Branch-and-bound engine for the egalitarian rules.

The search walks the levels in order and, within a level, extends the
committee candidate by candidate in canonical order, so leaves are reached
in exactly the order :func:`egalseq.oracle.enumerate_valid` lists them.
Every node gets an optimistic bound from the agents' best possible
completions; a node is cut when that bound cannot beat (``solve_one``) or
reach (``solve_all``) the value being looked for.

Three lex backends share the engine:

``direct``
    one search whose objective is the full satisfaction histogram.
``windowed``
    the histogram is optimized window by window over the score axis,
    freezing the counts below each window, the way an integer-bounded
    backend has to chunk it.
``rounds``
    repeatedly maximize the next smallest score present in the solution
    and minimize how many agents sit on it, freezing earlier rounds.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field

from .model import (
    ALS,
    ASL,
    CommitteeSequence,
    Election,
    compute_weights,
    weight_vector,
)

EGAL = "egal"
WEIGHTED = "weighted"
LEX = "lex"

LEX_BACKENDS = ("direct", "windowed", "rounds")

# largest objective value the chunked lex formulation lets one stage reach
INT_BOUND = 10**17


class Infeasible(ValueError):
    pass


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Objective:
    kind: str
    order: str | None = None
    lex_backend: str = "direct"
    window: int | None = None

    def __post_init__(self):
        if self.kind not in (EGAL, WEIGHTED, LEX):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == WEIGHTED and self.order not in (ALS, ASL):
            raise ValueError("weighted objectives need order ALS or ASL")
        if self.lex_backend not in LEX_BACKENDS:
            raise ValueError(f"unknown lex backend {self.lex_backend!r}")
        if self.window is not None and self.window < 1:
            raise ValueError("window width must be positive")

    @classmethod
    def for_rule(cls, rule: str, **kw) -> "Objective":
        rule = rule.upper()
        if rule == "EGAL":
            return cls(EGAL)
        if rule in (ALS, ASL):
            return cls(WEIGHTED, rule)
        if rule == "LEX":
            return cls(LEX, **kw)
        raise ValueError(f"rule {rule!r} is not solved by branch and bound")


@dataclass(frozen=True)
class SolveConfig:
    winner_cap: int = 30
    time_budget: float | None = None
    node_budget: int | None = None

    def __post_init__(self):
        for name in ("winner_cap", "time_budget", "node_budget"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolveResult:
    sequence: CommitteeSequence
    value: object
    optimal: bool = True
    nodes: int = 0
    elapsed: float = 0.0


@dataclass
class WinnerSet:
    winners: list[CommitteeSequence]
    complete: bool
    reason: str = ""
    stats: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.winners)

    def __len__(self):
        return len(self.winners)


def default_window(n: int) -> int:
    """Scores per stage so one stage's objective stays below ``INT_BOUND``."""
    return max(1, math.floor(math.log(INT_BOUND) / math.log(n + 1)) - 1)


class _Stop(Exception):
    pass


class _Search:
    def __init__(self, e: Election, config: SolveConfig | None = None):
        self.e = e
        self.config = config or SolveConfig()
        n = e.n
        self.ks = [lev.k for lev in e.levels]
        self.sizes = [len(lev.candidates) for lev in e.levels]
        self.entries = []
        self.cols = []
        self.suf = []
        self.csuf = []
        for lev in e.levels:
            m_t, k = len(lev.candidates), lev.k
            self.entries.append(
                [[(i, lev.utility[i][j]) for i in range(n) if lev.utility[i][j]] for j in range(m_t)]
            )
            cols = lev.column_sums()
            self.cols.append(cols)
            # suf[s][r][i]: agent i's best utility from r candidates with index >= s
            tops = [[] for _ in range(n)]
            ctop: list[int] = []
            suf = [None] * (m_t + 1)
            csuf = [None] * (m_t + 1)
            for s in range(m_t, -1, -1):
                if s < m_t:
                    for i in range(n):
                        tops[i] = sorted(tops[i] + [lev.utility[i][s]], reverse=True)[:k]
                    ctop = sorted(ctop + [cols[s]], reverse=True)[:k]
                suf[s] = [[sum(tops[i][:r]) for i in range(n)] for r in range(k + 1)]
                csuf[s] = [sum(ctop[:r]) for r in range(k + 1)]
            self.suf.append(suf)
            self.csuf.append(csuf)
        tau = e.tau
        self.fut = [[0] * n for _ in range(tau + 1)]
        self.fut_lev_sum = [0] * (tau + 1)
        self.fut_lev_min = [math.inf] * (tau + 1)
        for t in range(tau - 1, -1, -1):
            best = self.suf[t][0][self.ks[t]]
            self.fut[t] = [a + b for a, b in zip(self.fut[t + 1], best)]
            top = self.csuf[t][0][self.ks[t]]
            self.fut_lev_sum[t] = self.fut_lev_sum[t + 1] + top
            self.fut_lev_min[t] = min(self.fut_lev_min[t + 1], top)
        self.reset()

    def reset(self):
        self.scores = [0] * self.e.n
        self.lev_scores = [0] * self.e.tau
        self.total = 0
        self.chosen = [[] for _ in range(self.e.tau)]
        self.nodes = 0
        self.started = time.perf_counter()
        self.exhausted = False

    # -- incremental state ---------------------------------------------------

    def add(self, t, j):
        for i, u in self.entries[t][j]:
            self.scores[i] += u
        c = self.cols[t][j]
        self.lev_scores[t] += c
        self.total += c
        self.chosen[t].append(j)

    def remove(self, t, j):
        for i, u in self.entries[t][j]:
            self.scores[i] -= u
        c = self.cols[t][j]
        self.lev_scores[t] -= c
        self.total -= c
        self.chosen[t].pop()

    # -- optimistic completions at node (t, s, r) ---------------------------

    def opt_scores(self, t, s, r):
        if t >= self.e.tau:
            return list(self.scores)
        cur = self.suf[t][s][r]
        fut = self.fut[t + 1]
        return [a + b + c for a, b, c in zip(self.scores, cur, fut)]

    def opt_level_min(self, t, s, r):
        if t >= self.e.tau:
            return min(self.lev_scores) if self.lev_scores else 0
        vals = [self.lev_scores[t] + self.csuf[t][s][r], self.fut_lev_min[t + 1]]
        if t:
            vals.append(min(self.lev_scores[:t]))
        return min(vals)

    def opt_total(self, t, s, r):
        if t >= self.e.tau:
            return self.total
        return self.total + self.csuf[t][s][r] + self.fut_lev_sum[t + 1]

    # -- driver ---------------------------------------------------------------

    def tick(self):
        self.nodes += 1
        cfg = self.config
        if cfg.node_budget is not None and self.nodes > cfg.node_budget:
            self.exhausted = True
            raise _Stop
        if cfg.time_budget is not None and self.nodes % 512 == 0:
            if time.perf_counter() - self.started > cfg.time_budget:
                self.exhausted = True
                raise _Stop

    def leaf_indices(self):
        return tuple(tuple(c) for c in self.chosen)

    def run(self, problem, target=None, cap=None):
        """Depth-first search.

        Without ``target`` keep the first strictly best leaf; with ``target``
        collect (up to ``cap``) every leaf whose value equals it.
        """
        self.reset()
        self.best = None
        self.best_leaf = None
        self.found = []
        self.problem = problem
        self.target = target
        self.cap = cap
        for t, (k, m_t) in enumerate(zip(self.ks, self.sizes)):
            if k > m_t:
                raise Infeasible(f"level {t} has k={k} > {m_t} candidates")
        try:
            if self._keep(problem.bound(self, 0, 0, self.ks[0] if self.e.tau else 0)):
                self._rec(0, 0, self.ks[0] if self.e.tau else 0)
        except _Stop:
            pass
        return self

    def _keep(self, b):
        if b is None:
            return True
        if b is INFEASIBLE:
            return False
        if self.target is not None:
            return b >= self.target
        return self.best is None or b > self.best

    def _leaf(self):
        v = self.problem.leaf(self)
        if v is None:
            return
        if self.target is not None:
            if v == self.target:
                self.found.append(self.leaf_indices())
                if self.cap is not None and len(self.found) >= self.cap:
                    raise _Stop
        elif self.best is None or v > self.best:
            self.best = v
            self.best_leaf = self.leaf_indices()

    def _rec(self, t, s, r):
        self.tick()
        tau = self.e.tau
        while t < tau and r == 0:
            t += 1
            s = 0
            r = self.ks[t] if t < tau else 0
        if t >= tau:
            self._leaf()
            return
        last = self.sizes[t] - r
        for j in range(s, last + 1):
            self.add(t, j)
            if self._keep(self.problem.bound(self, t, j + 1, r - 1)):
                self._rec(t, j + 1, r - 1)
            self.remove(t, j)


INFEASIBLE = object()


class _EgalProblem:
    def leaf(self, S):
        return min(S.scores)

    def bound(self, S, t, s, r):
        return min(S.opt_scores(t, s, r))


class _WeightedProblem:
    def __init__(self, e, order):
        self.w = weight_vector(compute_weights(e), order)

    def leaf(self, S):
        wa, wl, ws = self.w
        return min(S.scores) * wa + min(S.lev_scores) * wl + S.total * ws

    def bound(self, S, t, s, r):
        wa, wl, ws = self.w
        return (
            min(S.opt_scores(t, s, r)) * wa
            + S.opt_level_min(t, s, r) * wl
            + S.opt_total(t, s, r) * ws
        )


class _LexProblem:
    """Full histogram, encoded as the ascending agent scores.

    A histogram is lexicographically smaller exactly when the ascending
    score vector is lexicographically larger, so larger keys are better and
    the key never grows with the score range. Every final score is at most
    the agent's optimistic score, hence the sorted optimistic vector bounds
    the sorted final vector componentwise.
    """

    def leaf(self, S):
        return tuple(sorted(S.scores))

    def bound(self, S, t, s, r):
        return tuple(sorted(S.opt_scores(t, s, r)))


def _window_key(scores, lo, hi, frozen):
    """Window objective for the chunked lex formulation, or None if the frozen prefix breaks."""
    cnt = Counter(scores)
    for v in range(lo):
        if cnt.get(v, 0) != frozen[v]:
            return None
    return tuple(-cnt.get(v, 0) for v in range(lo, hi + 1))


class _WindowProblem:
    def __init__(self, lo, hi, frozen):
        self.lo, self.hi, self.frozen = lo, hi, frozen

    def leaf(self, S):
        return _window_key(S.scores, self.lo, self.hi, self.frozen)

    def bound(self, S, t, s, r):
        cnt = Counter(S.opt_scores(t, s, r))
        for v in range(self.lo):
            c = cnt.get(v, 0)
            if c != self.frozen[v]:
                # optimistic prefix worse than frozen: no completion can match it
                return INFEASIBLE if c > self.frozen[v] else None
        return tuple(-cnt.get(v, 0) for v in range(self.lo, self.hi + 1))


class _RoundProblem:
    def __init__(self, n, fixed):
        self.n = n
        self.fixed = dict(fixed)
        self.covered = sum(self.fixed.values())
        self.floor = max(self.fixed, default=-1) + 1

    def leaf(self, S):
        cnt = Counter(S.scores)
        if any(cnt.get(v, 0) != c for v, c in self.fixed.items()):
            return None
        rest = [x for x in S.scores if x not in self.fixed]
        omega = min(rest)
        if omega < self.floor:
            return None
        return (self.n + 1) * omega - cnt[omega]

    def bound(self, S, t, s, r):
        opt = sorted(S.opt_scores(t, s, r))
        return (self.n + 1) * opt[self.covered] - 1


def _make_problem(e, objective):
    if objective.kind == EGAL:
        return _EgalProblem()
    if objective.kind == WEIGHTED:
        return _WeightedProblem(e, objective.order)
    return _LexProblem()


def _result(e, search, value, leaf, started):
    if leaf is None:
        raise SearchBudgetExceeded("search budget exhausted before any complete sequence was found")
    return SolveResult(
        sequence=e.sequence(leaf),
        value=value,
        optimal=not search.exhausted,
        nodes=search.nodes,
        elapsed=time.perf_counter() - started,
    )


def solve_one(e: Election, objective: Objective, config: SolveConfig | None = None) -> SolveResult:
    """One optimal valid sequence; among ties, the first in canonical order."""
    config = config or SolveConfig()
    if objective.kind == LEX and objective.lex_backend == "windowed":
        return staged_lex_solve(e, config, objective.window)
    if objective.kind == LEX and objective.lex_backend == "rounds":
        return rounds_lex_solve(e, config)
    started = time.perf_counter()
    search = _Search(e, config).run(_make_problem(e, objective))
    return _result(e, search, search.best, search.best_leaf, started)


def solve_all(e: Election, objective: Objective, config: SolveConfig | None = None) -> WinnerSet:
    """All optimal sequences in canonical order, up to ``config.winner_cap``.

    The first pass finds the optimum; the second walks the tree once more
    and collects every leaf reaching it, which yields exactly the sequences
    that repeated solving with exclusion constraints would return, in the
    same order. ``complete`` is False when the cap was reached or a budget
    ran out.
    """
    config = config or SolveConfig()
    if objective.kind == LEX and objective.lex_backend != "direct":
        objective = Objective(LEX)
    started = time.perf_counter()
    first = solve_one(e, objective, config)
    if not first.optimal:
        return WinnerSet([first.sequence], False, "budget", {"nodes": first.nodes})
    search = _Search(e, config)
    search.run(_make_problem(e, objective), target=first.value, cap=config.winner_cap)
    winners = [e.sequence(idx) for idx in search.found]
    capped = len(winners) >= config.winner_cap
    complete = not capped and not search.exhausted
    reason = "cap" if capped else ("budget" if search.exhausted else "")
    stats = {"nodes": first.nodes + search.nodes, "elapsed": time.perf_counter() - started}
    return WinnerSet(winners, complete, reason, stats)


def staged_lex_solve(e: Election, config: SolveConfig | None = None, window: int | None = None) -> SolveResult:
    """Lex solve as a sequence of score windows, freezing earlier counts."""
    config = config or SolveConfig()
    started = time.perf_counter()
    z = e.max_agent_total()
    width = window or default_window(e.n)
    frozen: list[int] = []
    nodes = 0
    optimal = True
    leaf = None
    lo = 0
    while lo <= z:
        hi = min(lo + width - 1, z)
        search = _Search(e, config).run(_WindowProblem(lo, hi, frozen))
        nodes += search.nodes
        optimal &= not search.exhausted
        if search.best_leaf is None:
            raise SearchBudgetExceeded("window stage ended without a feasible sequence")
        leaf = search.best_leaf
        frozen.extend(-c for c in search.best)
        lo = hi + 1
    seq = e.sequence(leaf)
    scores = _scores_of(e, leaf)
    return SolveResult(seq, tuple(sorted(scores)), optimal, nodes, time.perf_counter() - started)


def rounds_lex_solve(e: Election, config: SolveConfig | None = None) -> SolveResult:
    """Lex solve by rounds over the scores that actually occur."""
    config = config or SolveConfig()
    started = time.perf_counter()
    fixed: dict[int, int] = {}
    nodes = 0
    optimal = True
    leaf = None
    n = e.n
    while sum(fixed.values()) < n:
        search = _Search(e, config).run(_RoundProblem(n, fixed))
        nodes += search.nodes
        optimal &= not search.exhausted
        if search.best_leaf is None:
            raise SearchBudgetExceeded("round ended without a feasible sequence")
        leaf = search.best_leaf
        omega = (search.best + n) // (n + 1)
        fixed[omega] = (n + 1) * omega - search.best
    if leaf is None:
        leaf = tuple(tuple(range(k)) for k in (lev.k for lev in e.levels))
    scores = _scores_of(e, leaf)
    return SolveResult(e.sequence(leaf), tuple(sorted(scores)), optimal, nodes, time.perf_counter() - started)


def _scores_of(e, leaf):
    scores = [0] * e.n
    for lev, idx in zip(e.levels, leaf):
        for i, row in enumerate(lev.utility):
            scores[i] += sum(row[j] for j in idx)
    return scores


def partial_bound(e: Election, objective: Objective, prefix) -> object:
    """Optimistic bound of a partial sequence given as per-level index lists.

    ``prefix`` lists the committees of the first few levels; the last entry
    may be incomplete, in which case only candidates after its largest index
    remain available on that level (the search's canonical extension rule).
    """
    search = _Search(e)
    problem = _make_problem(e, objective)
    prefix = [list(c) for c in prefix]
    t = 0
    s, r = 0, e.levels[0].k if e.tau else 0
    for t, committee in enumerate(prefix):
        for j in sorted(committee):
            search.add(t, j)
        s = (max(committee) + 1) if committee else 0
        r = e.levels[t].k - len(committee)
    return problem.bound(search, t, s, r)
