"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are also collected and repeated in the pytest terminal summary.
"""
import random
import time
from itertools import combinations, combinations_with_replacement, product

import pytest

from egalseq import axioms
from egalseq.harness import DiscardPolicy, axiom_scan, degenerate
from egalseq.ingest import APPROVAL1, APPROVAL2, POINT, build_election, cleanup, ingest, kappa_rule, load_labels, parse_ranked
from egalseq.model import (
    ALS,
    ASL,
    Election,
    Level,
    agent_scores,
    lex_compare,
    lex_score_exact,
    sat_histogram,
    score_triple,
)
from egalseq.oracle import (
    VERTEX_COVER_THRESHOLD,
    binpacking_threshold,
    brute_rule,
    gen_binpacking_instance,
    gen_example1,
    gen_partition_instance,
    gen_vertexcover_instance,
    two_stage_filter,
)
from egalseq.rules import EGAL, EXACT_RULES, GREEDY, LEX, RULES, SUM, rule_greedy, single_winner, winners
from egalseq.solver import WEIGHTED, Objective, SolveConfig, solve_all, solve_one

from conftest import ACCEPTANCE, DATA, load_fixture, random_small, suite

UNCAPPED = SolveConfig(winner_cap=10**6)


def report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def oracle_suite():
    return suite(seed=2024, count=500)


# 1


def test_criterion_1_example_exactness():
    started = time.perf_counter()
    e = gen_example1()
    want = {
        SUM: ((0, 5, 19), [0, 3, 8, 8]),
        ASL: ((3, 3, 16), [3, 3, 5, 5]),
        ALS: ((3, 4, 14), [3, 3, 4, 4]),
        LEX: ((3, 3, 15), [3, 4, 4, 4]),
    }
    got = {}
    for rule in want:
        x = single_winner(e, rule)
        got[rule] = (score_triple(e, x).as_tuple(), sorted(agent_scores(e, x)))
    elapsed = time.perf_counter() - started
    report(1, got == want and elapsed < 1, f"example rows match exactly, {elapsed:.3f}s (< 1s)")


# 2


def test_criterion_2_oracle_equivalence(oracle_suite):
    started = time.perf_counter()
    mismatches = 0
    for e in oracle_suite:
        for rule in EXACT_RULES:
            if winners(e, rule, UNCAPPED).winners != brute_rule(e, rule):
                mismatches += 1
        for rule in (SUM, GREEDY):
            if single_winner(e, rule) not in brute_rule(e, rule):
                mismatches += 1
    elapsed = time.perf_counter() - started
    report(2, mismatches == 0 and elapsed < 60,
           f"{len(oracle_suite)} instances, {mismatches} mismatches, {elapsed:.1f}s (< 60s)")


# 3


def test_criterion_3_weighted_and_lex_equivalences(oracle_suite):
    weighted_bad = lex_bad = pairs = 0
    for e in oracle_suite:
        for order in (ALS, ASL):
            if solve_all(e, Objective(WEIGHTED, order), UNCAPPED).winners != two_stage_filter(e, order):
                weighted_bad += 1
        pool = list(dict.fromkeys(x for rule in RULES for x in winners(e, rule, UNCAPPED).winners))
        for x, y in combinations(pool, 2):
            pairs += 1
            a, b = lex_score_exact(e, x), lex_score_exact(e, y)
            if (a > b) - (a < b) != lex_compare(sat_histogram(e, x), sat_histogram(e, y)):
                lex_bad += 1
    report(3, weighted_bad == 0 and lex_bad == 0,
           f"weighted vs two-stage {weighted_bad} mismatches; exact lex vs histogram {lex_bad}/{pairs} pairs")


# 4


def test_criterion_4_containment(oracle_suite):
    bad = 0
    for e in oracle_suite:
        egal = set(winners(e, EGAL, UNCAPPED).winners)
        for rule in (LEX, ALS, ASL):
            if not set(winners(e, rule, UNCAPPED).winners) <= egal:
                bad += 1
    report(4, bad == 0, f"{len(oracle_suite)} instances, {bad} containment violations")


# 5

FIXTURES = {
    (axioms.P1, GREEDY): "p1_greedy",
    (axioms.P2, GREEDY): "p2_greedy",
    (axioms.P2, SUM): "p2_sum",
    (axioms.P3, GREEDY): "p3_greedy",
    (axioms.P3, ASL): "p3_asl",
    (axioms.P3, ALS): "p3_als",
    (axioms.P4, GREEDY): "p4_greedy",
    (axioms.P4, ALS): "p4_als",
    (axioms.P5, ASL): "p5_asl",
    (axioms.P5, ALS): "p5_als",
}


def axiom_corpus(seed, count):
    rng = random.Random(seed)
    return [(f"s{i:04d}", random_small(rng, max_agents=3, max_levels=3, max_cands=3, umax=3))
            for i in range(count)]


SCAN_SIZES = {axioms.P1: 260, axioms.P2: 40, axioms.P3: 600, axioms.P4: 260, axioms.P5: 200}


@pytest.mark.parametrize("prop", sorted(axioms.PROPERTIES))
def test_criterion_5a_universal_cells(prop):
    corpus = axiom_corpus(50 + int(prop[1]), SCAN_SIZES[prop])
    scan = axiom_scan(corpus, prop, RULES, DiscardPolicy())
    violations = {rule: scan.verdicts[rule].get(axioms.VIOLATED, 0) for rule in axioms.SATISFIERS[prop]}
    vacuous = scan.verdicts[LEX].get(axioms.VACUOUS, 0)
    ok = scan.accounting_ok() and scan.considered - vacuous >= 200 and not any(violations.values())
    report("5a", ok, f"{prop}: {scan.considered} units considered, {scan.considered - vacuous} non-vacuous for LEX (>= 200), "
                     f"violations in yes cells {sum(violations.values())}")


def test_criterion_5b_existential_cells():
    missing = []
    for (prop, rule), name in FIXTURES.items():
        doc, es = load_fixture(name)
        if axioms.CHECKS[prop](*es, rule).verdict != axioms.VIOLATED:
            missing.append(name)
    expected = {(p, r) for p, rs in axioms.VIOLATORS.items() for r in rs if r != EGAL}
    ok = not missing and set(FIXTURES) == expected
    report("5b", ok, f"{len(FIXTURES) - len(missing)}/{len(FIXTURES)} no-cell fixtures report violated")


# 6


def test_criterion_6_independent_groups_products():
    rng = random.Random(606)
    glued = bad = 0
    while glued < 120:
        e1 = axioms.prefixed(random_small(rng, max_agents=3, max_levels=3, max_cands=3), "g1:", "g1:")
        e2 = axioms.prefixed(random_small(rng, max_agents=3, max_levels=3, max_cands=3), "g2:", "g2:")
        if degenerate(e1) or degenerate(e2):
            continue
        e = axioms.glue_groups(e1, e2)
        if axioms.detect_grouping(e).r != 2:
            continue
        glued += 1
        for rule in (LEX, GREEDY):
            w1 = winners(e1, rule, UNCAPPED).winners
            w2 = winners(e2, rule, UNCAPPED).winners
            product_set = {x.concat(y) for x, y in product(w1, w2)}
            if set(winners(e, rule, UNCAPPED).winners) != product_set:
                bad += 1
    report(6, bad == 0, f"{glued} glued 2-group instances, {bad} product mismatches")


# 7


def egal_optimum(e):
    return min(agent_scores(e, solve_one(e, Objective.for_rule(EGAL)).sequence))


def subset_sums(xs):
    sums = {0}
    for x in xs:
        sums |= {s + x for s in sums}
    return sums


def bins_fit(items, bins, capacity):
    return any(
        all(sum(x for x, b in zip(items, assign) if b == j) <= capacity for j in range(bins))
        for assign in product(range(bins), repeat=len(items))
    )


def test_criterion_7_gadgets():
    bad = checked = 0
    for size in range(1, 7):
        for ms in combinations_with_replacement(range(1, 7), size):
            checked += 1
            equal = 2 * (sum(ms) // 2) == sum(ms) and sum(ms) // 2 in subset_sums(ms)
            bad += (2 * egal_optimum(gen_partition_instance(ms)) >= sum(ms)) != equal
    for size in range(1, 5):
        for items in combinations_with_replacement(range(1, 5), size):
            for bins in (1, 2, 3):
                e = gen_binpacking_instance(items, bins)
                opt = egal_optimum(e)
                for cap in range(max(items), sum(items) + 1):
                    checked += 1
                    bad += (opt >= binpacking_threshold(items, cap)) != bins_fit(items, bins, cap)
    vertices = range(1, 7)
    all_edges = list(combinations(vertices, 2))
    for mask in range(1, 1 << len(all_edges)):
        edges = [edge for i, edge in enumerate(all_edges) if mask >> i & 1]
        cover = min(len(c) for r in range(7) for c in combinations(vertices, r)
                    if all(u in c or v in c for u, v in edges))
        for k in range(1, 6):
            checked += 1
            e = gen_vertexcover_instance(edges, k, vertices=vertices)
            bad += (egal_optimum(e) >= VERTEX_COVER_THRESHOLD) != (cover <= k)
    report(7, bad == 0, f"{checked} gadget iff checks, {bad} mismatches")


# 8

HAND = {
    APPROVAL2: [((1, 1, 0), (1, 1, 0), (0, 1, 0)), ((1, 1), (1, 1), (0, 1))],
    APPROVAL1: [((1, 0, 0), (1, 0, 0), (0, 1, 0)), ((1, 0), (1, 0), (0, 1))],
    POINT: [((6, 4, 0), (6, 4, 0), (0, 10, 0)), ((7, 3), (7, 3), (0, 10))],
}


def test_criterion_8_ingestion_fixture():
    prof = parse_ranked(DATA / "ranked_fixture.soi")
    labels = load_labels(DATA / "ranked_labels.json")
    ok = prof.m == 4 and prof.n == 3
    for klass, util in HAND.items():
        e = build_election(prof, labels, klass)
        ok &= [lev.utility for lev in e.levels] == util
        c = kappa_rule(cleanup(e, klass), 2)
        ok &= c.kappa == (1, 1) and [lev.candidates for lev in c.levels] == [("A", "B"), ("C", "D")]
        ok &= c == ingest(DATA / "ranked_fixture.soi", DATA / "ranked_labels.json", klass, 2)
    report(8, bool(ok), "three classes built bit-exactly, cleanup plus kappa(2) gives k = (1, 1)")


# 9


def test_criterion_9_greedy_scaling():
    rng = random.Random(909)
    n, tau, per_level, k = 100, 20, 8, 2
    levels = tuple(
        Level(tuple(f"l{t}c{j}" for j in range(per_level)), k,
              tuple(tuple(rng.randint(0, 3) for _ in range(per_level)) for _ in range(n)))
        for t in range(tau)
    )
    e = Election(tuple(f"a{i}" for i in range(n)), levels)
    assert e.m == 160 and sum(e.kappa) == 40
    stats = {}
    started = time.perf_counter()
    rule_greedy(e, stats=stats)
    elapsed = time.perf_counter() - started
    # bound model: at most sum(k) steps, each scanning at most m insertions of O(n) updates
    bound_steps = sum(e.kappa)
    measured = stats["steps"] + stats["preseeded"]
    scans_ok = stats["insertions"] <= (stats["steps"] + 1) * e.m
    updates_ok = stats["score_updates"] <= stats["insertions"] * n
    ok = elapsed < 5 and bound_steps / 2 <= measured <= bound_steps and scans_ok and updates_ok
    report(9, ok, f"{elapsed:.2f}s (< 5s), steps {measured} vs bound {bound_steps}, "
                  f"insertions {stats['insertions']} <= {(stats['steps'] + 1) * e.m}")
