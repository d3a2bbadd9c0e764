"""Search small random elections for property counterexamples and freeze them.

Every predicate here is evaluated on brute-force winner sets from
``egalseq.oracle``; the branch-and-bound solver and the property checkers
are not used, so the frozen fixtures test them independently.

    python3 scripts/find_witnesses.py [outdir]
"""

import json
import random
import sys
from itertools import product
from pathlib import Path

from egalseq.axioms import concat_elections, glue_groups, restrict, stack_elections, union_elections
from egalseq.model import Election, Level, agent_scores, election_to_dict
from egalseq.oracle import brute_rule, dominates, enumerate_valid

TRIES = 50_000


def rand_election(rng, agents, tau, cands, umax=3, kmax=1, prefix="a", cprefix="l"):
    levels = []
    for t in range(tau):
        m = rng.choice(cands) if isinstance(cands, (list, tuple)) else cands
        util = tuple(tuple(rng.randint(0, umax) for _ in range(m)) for _ in range(agents))
        levels.append(Level(tuple(f"{cprefix}{t + 1}c{j + 1}" for j in range(m)), rng.randint(1, min(kmax, m)), util))
    return Election(tuple(f"{prefix}{i + 1}" for i in range(agents)), tuple(levels))


def maxmin(e, seqs):
    return max(min(agent_scores(e, x)) for x in seqs)


def merge_violated(e1, e2, rule, merge_e, merge_x):
    e = merge_e(e1, e2)
    w1, w2, w = brute_rule(e1, rule), brute_rule(e2, rule), brute_rule(e, rule)
    pairs = maxmin(e, [merge_x(a, b) for a, b in product(w1, w2)])
    return maxmin(e, w) < pairs, maxmin(e, w), pairs


def p1(rule, shape=None):
    def pred(e1, e2):
        bad, got, want = merge_violated(e1, e2, rule, concat_elections, lambda a, b: a.concat(b))
        return bad and (shape is None or (got, want) == shape), {"merged_best": got, "pair_best": want}
    return pred


def p2(rule, zero_merged=False):
    def pred(e1, e2):
        bad, got, want = merge_violated(e1, e2, rule, union_elections, lambda a, b: a.union(b))
        return bad and (not zero_merged or got == 0), {"merged_best": got, "pair_best": want}
    return pred


def p3(rule):
    def pred(e1, e2):
        common = set(brute_rule(e1, rule)) & set(brute_rule(e2, rule))
        merged = set(brute_rule(stack_elections(e1, e2), rule))
        return bool(common) and not common <= merged, {"common": len(common)}
    return pred


def p4(rule):
    def pred(e):
        w = brute_rule(e, rule)
        for x in w:
            if any(dominates(e, y, x) for y in enumerate_valid(e)):
                return True, {}
        return False, {}
    return pred


def p5(rule, cut):
    def pred(e):
        agents1 = [a for a in e.agents if a.startswith("g1")]
        agents2 = [a for a in e.agents if a.startswith("g2")]
        s1 = restrict(e, agents1, range(cut))
        s2 = restrict(e, agents2, range(cut, e.tau))
        prod = {x.concat(y) for x in brute_rule(s1, rule) for y in brute_rule(s2, rule)}
        return set(brute_rule(e, rule)) != prod, {}
    return pred


def search(name, make, pred, seed):
    rng = random.Random(seed)
    for i in range(TRIES):
        elections = make(rng)
        try:
            ok, info = pred(*elections)
        except ValueError:
            continue
        if ok:
            print(f"{name}: found after {i + 1} tries")
            return elections, info
    raise SystemExit(f"{name}: no witness in {TRIES} tries")


def pair_same_agents(agents, tau, cands, **kw):
    return lambda rng: (rand_election(rng, agents, tau, cands, **kw), rand_election(rng, agents, tau, cands, **kw))


def pair_disjoint(agents, tau, cands, **kw):
    return lambda rng: (rand_election(rng, agents, tau, cands, prefix="x", cprefix="p", **kw),
                        rand_election(rng, agents, tau, cands, prefix="y", cprefix="q", **kw))


def stacked_pair(agents, tau, cands, umax=3, **kw):
    """Two electorates over the same candidates and committee sizes."""
    def make(rng):
        e1 = rand_election(rng, agents, tau, cands, umax=umax, prefix="x", **kw)
        levels = tuple(
            Level(lev.candidates, lev.k,
                  tuple(tuple(rng.randint(0, umax) for _ in lev.candidates) for _ in range(agents)))
            for lev in e1.levels
        )
        return e1, Election(tuple(f"y{i + 1}" for i in range(agents)), levels)
    return make


def glued(tau1, agents2, tau2, cands, **kw):
    def make(rng):
        e1 = rand_election(rng, 1, tau1, cands, prefix="g1a", **kw)
        e2 = rand_election(rng, agents2, tau2, cands, prefix="g2a", **kw)
        return (glue_groups(e1, e2),)
    return make


def sum_beats_greedy(e):
    s = brute_rule(e, "SUM")
    g = brute_rule(e, "GREEDY")
    lo_sum = min(min(agent_scores(e, x)) for x in s)
    hi_greedy = max(min(agent_scores(e, x)) for x in g)
    return lo_sum > hi_greedy, {"sum_min": lo_sum, "greedy_min": hi_greedy}


def two_greedy(e):
    g = brute_rule(e, "GREEDY")
    return len(g) == 2, {"winners": len(g)}


TARGETS = [
    # name, property, rule, generator, predicate
    ("sum_beats_greedy", None, None, lambda rng: (rand_election(rng, 3, 3, 2),), sum_beats_greedy),
    ("greedy_two_winners", None, None, lambda rng: (rand_election(rng, 3, 2, 3),), two_greedy),
    ("p1_greedy", "P1", "GREEDY", pair_same_agents(3, 2, 2, umax=2), p1("GREEDY", shape=(1, 2))),
    ("p2_greedy", "P2", "GREEDY", pair_disjoint(2, 2, 2), p2("GREEDY")),
    ("p2_sum", "P2", "SUM", pair_disjoint(2, 2, 2), p2("SUM", zero_merged=True)),
    ("p3_greedy", "P3", "GREEDY", stacked_pair(2, 2, 3), p3("GREEDY")),
    ("p3_asl", "P3", "ASL", stacked_pair(2, 2, 3), p3("ASL")),
    ("p3_als", "P3", "ALS", stacked_pair(2, 2, 3), p3("ALS")),
    ("p4_greedy", "P4", "GREEDY", lambda rng: (rand_election(rng, 3, 3, 2),), p4("GREEDY")),
    ("p4_als", "P4", "ALS", lambda rng: (rand_election(rng, 3, 3, 2),), p4("ALS")),
    ("p5_asl", "P5", "ASL", glued(1, 3, 3, 2), p5("ASL", 1)),
    ("p5_als", "P5", "ALS", glued(1, 3, 3, 2), p5("ALS", 1)),
]


def main(outdir="tests/data"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for seed, (name, prop, rule, make, pred) in enumerate(TARGETS):
        elections, info = search(name, make, pred, seed)
        doc = {
            "name": name,
            "property": prop,
            "rule": rule,
            "elections": [election_to_dict(e) for e in elections],
            "oracle": info,
        }
        (out / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
