"""Multilevel elections, committee sequences and their scores.

Every rule, solver and property checker in the package goes through the
score functions defined here, so they are the single reference for what
"agent score", "level score", "sum score" and the satisfaction histogram
mean.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence


class InvalidElection(ValueError):
    pass


class InvalidSequence(ValueError):
    pass


def _check_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidElection(f"{what} must be an integer, got {value!r}")
    if value < 0:
        raise InvalidElection(f"{what} must be nonnegative, got {value}")
    return value


@dataclass(frozen=True)
class Level:
    """One level: its candidates, committee size and utility matrix.

    ``utility[i][j]`` is the utility agent ``i`` assigns to ``candidates[j]``.
    """

    candidates: tuple[str, ...]
    k: int
    utility: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        cands = tuple(str(c) for c in self.candidates)
        if not cands:
            raise InvalidElection("a level needs at least one candidate")
        if len(set(cands)) != len(cands):
            raise InvalidElection(f"duplicate candidates on a level: {cands}")
        k = _check_int(self.k, "committee size")
        if k > len(cands):
            raise InvalidElection(
                f"committee size {k} exceeds the {len(cands)} candidates on the level"
            )
        rows = []
        for row in self.utility:
            row = tuple(_check_int(u, "utility") for u in row)
            if len(row) != len(cands):
                raise InvalidElection(
                    f"utility row has {len(row)} entries for {len(cands)} candidates"
                )
            rows.append(row)
        object.__setattr__(self, "candidates", cands)
        object.__setattr__(self, "utility", tuple(rows))
        object.__setattr__(self, "_index", {c: j for j, c in enumerate(cands)})

    @property
    def index(self) -> dict[str, int]:
        return self._index  # type: ignore[attr-defined]

    def column_sums(self) -> list[int]:
        return [sum(col) for col in zip(*self.utility)] if self.utility else [0] * len(self.candidates)

    def top_sum(self, r: int | None = None) -> int:
        """Largest total utility of any ``r`` candidates (default ``k``)."""
        r = self.k if r is None else r
        return sum(sorted(self.column_sums(), reverse=True)[:r])


@dataclass(frozen=True)
class Election:
    agents: tuple[str, ...]
    levels: tuple[Level, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        agents = tuple(str(a) for a in self.agents)
        if not agents:
            raise InvalidElection("an election needs at least one agent")
        if len(set(agents)) != len(agents):
            raise InvalidElection("duplicate agent identifiers")
        levels = tuple(self.levels)
        for t, lev in enumerate(levels):
            if len(lev.utility) != len(agents):
                raise InvalidElection(
                    f"level {t} has {len(lev.utility)} utility rows for {len(agents)} agents"
                )
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "meta", dict(self.meta or {}))
        object.__setattr__(self, "_agent_index", {a: i for i, a in enumerate(agents)})

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def tau(self) -> int:
        return len(self.levels)

    @property
    def m(self) -> int:
        """Number of distinct candidates over all levels."""
        return len({c for lev in self.levels for c in lev.candidates})

    @property
    def kappa(self) -> tuple[int, ...]:
        return tuple(lev.k for lev in self.levels)

    def agent_index(self, a: str) -> int:
        try:
            return self._agent_index[a]  # type: ignore[attr-defined]
        except KeyError:
            raise InvalidSequence(f"unknown agent {a!r}") from None

    def max_agent_total(self) -> int:
        """Z(E): the largest utility any agent assigns to all candidates of all levels."""
        return max(
            sum(sum(lev.utility[i]) for lev in self.levels) for i in range(self.n)
        ) if self.levels else 0

    def with_kappa(self, kappa: Sequence[int]) -> "Election":
        if len(kappa) != self.tau:
            raise InvalidElection("kappa length must equal the number of levels")
        levels = [Level(lev.candidates, k, lev.utility) for lev, k in zip(self.levels, kappa)]
        return Election(self.agents, levels, self.meta)

    def indices(self, x: "CommitteeSequence") -> tuple[tuple[int, ...], ...]:
        """Per-level sorted candidate indices of ``x``; checks level membership."""
        if len(x.committees) != self.tau:
            raise InvalidSequence(
                f"sequence has {len(x.committees)} committees for {self.tau} levels"
            )
        out = []
        for t, (lev, committee) in enumerate(zip(self.levels, x.committees)):
            try:
                out.append(tuple(sorted(lev.index[c] for c in committee)))
            except KeyError as err:
                raise InvalidSequence(f"candidate {err.args[0]!r} is not on level {t}") from None
        return tuple(out)

    def sequence(self, idx: Iterable[Iterable[int]]) -> "CommitteeSequence":
        return CommitteeSequence(
            [lev.candidates[j] for j in committee] for lev, committee in zip(self.levels, idx)
        )

    def canonical_key(self, x: "CommitteeSequence") -> tuple:
        return self.indices(x)

    def is_valid(self, x: "CommitteeSequence") -> bool:
        return all(len(c) == lev.k for c, lev in zip(self.indices(x), self.levels))


@dataclass(frozen=True)
class CommitteeSequence:
    committees: tuple[frozenset, ...]

    def __init__(self, committees: Iterable[Iterable[str]]):
        object.__setattr__(
            self, "committees", tuple(frozenset(str(c) for c in x) for x in committees)
        )

    def __len__(self):
        return len(self.committees)

    def __iter__(self):
        return iter(self.committees)

    def __getitem__(self, t):
        return self.committees[t]

    def __repr__(self):
        inner = ", ".join("{" + ", ".join(sorted(c)) + "}" for c in self.committees)
        return f"CommitteeSequence(({inner}))"

    @classmethod
    def empty(cls, e: Election) -> "CommitteeSequence":
        return cls([] for _ in e.levels)

    def concat(self, other: "CommitteeSequence") -> "CommitteeSequence":
        return CommitteeSequence(self.committees + other.committees)

    def union(self, other: "CommitteeSequence") -> "CommitteeSequence":
        if len(self) != len(other):
            raise InvalidSequence("level-wise union needs sequences of equal length")
        return CommitteeSequence(a | b for a, b in zip(self.committees, other.committees))

    def to_lists(self, e: Election | None = None) -> list[list[str]]:
        if e is None:
            return [sorted(c) for c in self.committees]
        return [[lev.candidates[j] for j in idx] for lev, idx in zip(e.levels, e.indices(self))]


@dataclass(frozen=True)
class SatHistogram:
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(self.counts))

    def __getitem__(self, i):
        return self.counts[i] if i < len(self.counts) else 0

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class ScoreTriple:
    agent_min: int
    level_min: int
    total: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.agent_min, self.level_min, self.total)


@dataclass(frozen=True)
class ObjectiveWeights:
    theta: int
    sigma: int


ALS = "ALS"
ASL = "ASL"


def agent_scores(e: Election, x: CommitteeSequence) -> list[int]:
    idx = e.indices(x)
    scores = [0] * e.n
    for lev, committee in zip(e.levels, idx):
        for i, row in enumerate(lev.utility):
            scores[i] += sum(row[j] for j in committee)
    return scores


def level_scores(e: Election, x: CommitteeSequence) -> list[int]:
    idx = e.indices(x)
    return [
        sum(row[j] for row in lev.utility for j in committee)
        for lev, committee in zip(e.levels, idx)
    ]


def score_agent(e: Election, x: CommitteeSequence, a: str) -> int:
    i = e.agent_index(a)
    return agent_scores(e, x)[i]


def score_agent_min(e: Election, x: CommitteeSequence) -> int:
    return min(agent_scores(e, x))


def score_level(e: Election, x: CommitteeSequence, t: int) -> int:
    if not 0 <= t < e.tau:
        raise IndexError(f"level index {t} out of range for {e.tau} levels")
    return level_scores(e, x)[t]


def score_level_min(e: Election, x: CommitteeSequence) -> int:
    return min(level_scores(e, x))


def score_sum(e: Election, x: CommitteeSequence) -> int:
    total = sum(agent_scores(e, x))
    assert total == sum(level_scores(e, x))
    return total


def score_triple(e: Election, x: CommitteeSequence) -> ScoreTriple:
    ag = agent_scores(e, x)
    lv = level_scores(e, x)
    return ScoreTriple(min(ag), min(lv), sum(ag))


def histogram_of(scores: Iterable[int], z: int) -> SatHistogram:
    counts = [0] * (z + 1)
    for s in scores:
        counts[s] += 1
    return SatHistogram(counts)


def sat_histogram(e: Election, x: CommitteeSequence) -> SatHistogram:
    return histogram_of(agent_scores(e, x), e.max_agent_total())


def lex_compare(h1: SatHistogram, h2: SatHistogram) -> int:
    """Compare two satisfaction histograms for the lex rule.

    Returns -1 when ``h1`` is strictly better (it has fewer agents at the
    lowest score where the two differ), 0 when equal and 1 otherwise. The
    shorter histogram is padded with zeros.
    """
    c1, c2 = h1.counts, h2.counts
    for i in range(max(len(c1), len(c2))):
        a = c1[i] if i < len(c1) else 0
        b = c2[i] if i < len(c2) else 0
        if a != b:
            return -1 if a < b else 1
    return 0


def lex_score_exact(e: Election, x: CommitteeSequence) -> int:
    """The lex objective as one (possibly huge) integer; smaller is better."""
    z = e.max_agent_total()
    base = e.n + 1
    hist = sat_histogram(e, x)
    return sum(hist[i] * base ** (z - i) for i in range(z + 1))


def compute_weights(e: Election) -> ObjectiveWeights:
    tops = [lev.top_sum() for lev in e.levels]
    return ObjectiveWeights(theta=1 + max(tops, default=0), sigma=1 + sum(tops))


def weight_vector(w: ObjectiveWeights, order: str) -> tuple[int, int, int]:
    if order == ALS:
        return (w.theta * w.sigma, w.sigma, 1)
    if order == ASL:
        return (w.theta * w.sigma, 1, w.theta)
    raise ValueError(f"unknown objective order {order!r}")


def weighted_value(triple: ScoreTriple, w: ObjectiveWeights, order: str) -> int:
    wa, wl, ws = weight_vector(w, order)
    return triple.agent_min * wa + triple.level_min * wl + triple.total * ws


def weighted_objective(e: Election, x: CommitteeSequence, order: str) -> int:
    return weighted_value(score_triple(e, x), compute_weights(e), order)


def valid_committees(lev: Level) -> Iterable[tuple[int, ...]]:
    return combinations(range(len(lev.candidates)), lev.k)


# -- canonical election file format ---------------------------------------


def election_to_dict(e: Election) -> dict:
    return {
        "agents": list(e.agents),
        "levels": [
            {"candidates": list(lev.candidates), "k": lev.k, "utilities": [list(r) for r in lev.utility]}
            for lev in e.levels
        ],
        "meta": dict(e.meta),
    }


def election_from_dict(data: Mapping) -> Election:
    try:
        agents = data["agents"]
        levels = [
            Level(tuple(lev["candidates"]), lev["k"], tuple(tuple(r) for r in lev["utilities"]))
            for lev in data["levels"]
        ]
    except (KeyError, TypeError) as err:
        raise InvalidElection(f"malformed election document: {err}") from None
    return Election(tuple(agents), tuple(levels), dict(data.get("meta") or {}))


def dumps_election(e: Election) -> str:
    return json.dumps(election_to_dict(e), indent=1) + "\n"


def loads_election(text: str) -> Election:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise InvalidElection(f"not a valid election document: {err}") from None
    return election_from_dict(data)


def read_election(path: str | Path) -> Election:
    e = loads_election(Path(path).read_text())
    e.meta.setdefault("source", str(path))
    return e


def write_election(e: Election, path: str | Path) -> None:
    Path(path).write_text(dumps_election(e))
