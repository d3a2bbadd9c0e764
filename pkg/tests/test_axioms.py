import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egalseq import axioms
from egalseq.axioms import (
    AxiomVerdict,
    Grouping,
    check_independent_groups,
    check_pareto,
    check_safe_concatenation,
    check_safe_union,
    check_sub_consistency,
    concat_elections,
    detect_grouping,
    glue_groups,
    is_grouping,
    literal_safe_merge,
    prefixed,
    restrict,
    split_agents,
    split_levels,
    stack_elections,
    union_elections,
)
from egalseq.model import Election, InvalidElection, Level, agent_scores
from egalseq.oracle import enumerate_valid
from egalseq.rules import RULES
from egalseq.solver import SolveConfig

from conftest import elections, load_fixture, random_small

NO_CELLS = [
    ("p1_greedy", "GREEDY"),
    ("p2_greedy", "GREEDY"),
    ("p2_sum", "SUM"),
    ("p3_greedy", "GREEDY"),
    ("p3_asl", "ASL"),
    ("p3_als", "ALS"),
    ("p4_greedy", "GREEDY"),
    ("p4_als", "ALS"),
    ("p5_asl", "ASL"),
    ("p5_als", "ALS"),
]


def renamed(e, prefix):
    return Election(tuple(prefix + a for a in e.agents), e.levels)


def disjoint(e, prefix):
    return prefixed(e, prefix, prefix)


def single_candidate(agents, tau):
    return Election(tuple(agents), tuple(Level((f"only{t}",), 1, tuple((1,) for _ in agents)) for t in range(tau)))


def test_concat_identity_and_length(ex1):
    empty = Election(ex1.agents, ())
    assert concat_elections(ex1, empty) == ex1
    a, b = split_levels(ex1, 1)
    assert concat_elections(a, b) == ex1
    assert concat_elections(ex1, ex1).tau == 6


def test_concat_needs_same_agents(ex1):
    a, b = split_agents(ex1, 2)
    with pytest.raises(InvalidElection):
        concat_elections(a, b)


def test_union_sizes_and_errors(ex1):
    a, b = split_agents(ex1, 2)
    u = union_elections(a, b)
    assert u.kappa == (2, 2, 2)
    assert [len(lev.candidates) for lev in u.levels] == [2, 2, 2]
    with pytest.raises(InvalidElection):
        union_elections(a, a)
    with pytest.raises(InvalidElection):
        union_elections(a, split_levels(b, 1)[0])
    with pytest.raises(InvalidElection):
        union_elections(a, Election((), a.levels))
    one = single_candidate(["p"], 1)
    with pytest.raises(InvalidElection):
        union_elections(one, renamed(one, "z"))  # a shared single candidate cannot host k = 2


def test_union_zero_pads():
    e1 = Election(("a",), (Level(("x",), 1, ((2,),)),))
    e2 = Election(("b",), (Level(("y",), 1, ((3,),)),))
    u = union_elections(e1, e2)
    assert u.levels[0].candidates == ("x", "y")
    assert u.levels[0].utility == ((2, 0), (0, 3))


def test_stack_reorders_columns():
    e1 = Election(("a",), (Level(("x", "y"), 1, ((1, 2),)),))
    e2 = Election(("b",), (Level(("y", "x"), 1, ((5, 7),)),))
    s = stack_elections(e1, e2)
    assert s.levels[0].utility == ((1, 2), (7, 5))
    with pytest.raises(InvalidElection):
        stack_elections(e1, Election(("c",), (Level(("x", "z"), 1, ((1, 1),)),)))


def test_grouping_lone_agent_block():
    lone = Election(("a1",), (Level(("p", "q"), 1, ((2, 1),)),))
    rng = random.Random(0)
    block = Election(("a2", "a3", "a4"), tuple(
        Level(("r", "s", "t"), 1, tuple(tuple(rng.randint(1, 3) for _ in range(3)) for _ in range(3)))
        for _ in range(4)
    ))
    e = glue_groups(lone, block)
    g = detect_grouping(e)
    assert g.r == 2 and g.level_cuts == (1, 5)
    assert g.agent_parts == (("a1",), ("a2", "a3", "a4"))
    assert is_grouping(e, g)


def test_grouping_trivial(ex1):
    g = detect_grouping(ex1)
    assert g.r == 1 and g.agent_parts == (ex1.agents,)


def test_grouping_zero_agent_joins_first_block():
    e = Election(("a", "b", "z"), (
        Level(("x", "y"), 1, ((1, 0), (0, 0), (0, 0))),
        Level(("u", "v"), 1, ((0, 0), (2, 1), (0, 0))),
    ))
    g = detect_grouping(e)
    assert g.agent_parts == (("a", "z"), ("b",))
    assert not is_grouping(e, Grouping((("a",), ("b", "z")), (2,)))


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=4), st.randoms())
def test_grouping_recovers_construction(shapes, rnd):
    parts = []
    for s, (n, tau) in enumerate(shapes):
        levels = tuple(Level(("x", "y"), 1, tuple((rnd.randint(1, 3), rnd.randint(0, 3)) for _ in range(n)))
                       for _ in range(tau))
        parts.append(Election(tuple(f"g{s}_{i}" for i in range(n)), levels))
    e = parts[0]
    for p in parts[1:]:
        e = glue_groups(e, p)
    g = detect_grouping(e)
    assert g.r == len(shapes)
    assert is_grouping(e, g)


@pytest.mark.parametrize("name,rule", NO_CELLS)
def test_fixture_violates(name, rule):
    doc, es = load_fixture(name)
    assert doc["rule"] == rule
    v = axioms.CHECKS[doc["property"]](*es, rule)
    assert v.verdict == axioms.VIOLATED and not v.holds
    assert v.witness


def test_concat_fixture_shape():
    doc, (e1, e2) = load_fixture("p1_greedy")
    assert e1.agents == ("a1", "a2", "a3") and e1.tau == e2.tau == 2
    v = check_safe_concatenation(e1, e2, "GREEDY")
    assert (v.witness["pair_value"], v.witness["merged_value"]) == (2, 1)
    assert check_safe_concatenation(e1, e2, "LEX").verdict == axioms.HOLDS


def test_union_fixture_shape():
    doc, (e1, e2) = load_fixture("p2_sum")
    assert e1.n == e2.n == 2
    v = check_safe_union(e1, e2, "SUM")
    assert v.witness["merged_value"] == 0 and v.witness["pair_value"] > 0
    assert check_safe_union(e1, e2, "LEX").holds


def test_pareto_fixture_shape():
    _, (e,) = load_fixture("p4_als")
    assert e.kappa == (1, 1, 1)
    assert check_pareto(e, "LEX").holds


def test_trivial_instances_hold_everywhere():
    a = single_candidate(["a", "b"], 2)
    b = disjoint(single_candidate(["a", "b"], 2), "z")
    for rule in RULES:
        assert check_safe_concatenation(a, a, rule).holds
        assert check_safe_union(a, b, rule).holds
        assert check_pareto(a, rule).holds


def test_disjoint_copies_union_holds():
    e = Election(("a", "b"), (Level(("x", "y"), 1, ((2, 0), (1, 0))), Level(("z", "w"), 1, ((0, 1), (0, 2)))))
    other = Election(("c", "d"), tuple(Level(tuple(f"{c}2" for c in lev.candidates), lev.k, lev.utility) for lev in e.levels))
    for rule in RULES:
        assert check_safe_union(e, other, rule).holds


def test_duplicated_electorate_sub_consistent(ex1):
    for rule in RULES:
        v = check_sub_consistency(renamed(ex1, "x"), renamed(ex1, "y"), rule)
        assert v.verdict == axioms.HOLDS


def test_independent_groups_unique_winners():
    a = Election(("a",), (Level(("x", "y"), 1, ((3, 1),)),))
    b = Election(("b",), (Level(("z", "w"), 1, ((0, 2),)),))
    e = glue_groups(a, b)
    for rule in RULES:
        assert check_independent_groups(e, rule).verdict == axioms.HOLDS


def test_independent_groups_trivial_is_skipped(ex1):
    v = check_independent_groups(ex1, "LEX")
    assert v.verdict == axioms.SKIPPED and v.reason == "trivial grouping"
    assert v.holds is None


def test_truncated_winner_sets_skip(ex1):
    v = check_pareto(ex1, "EGAL", SolveConfig(winner_cap=1))
    assert v.verdict == axioms.SKIPPED
    v = check_sub_consistency(renamed(ex1, "x"), renamed(ex1, "y"), "EGAL", SolveConfig(winner_cap=2))
    assert v.verdict == axioms.SKIPPED


def test_violated_needs_witness():
    with pytest.raises(ValueError):
        AxiomVerdict("P1", "LEX", axioms.VIOLATED)


def test_sub_consistency_vacuous(ex1):
    a, b = split_agents(ex1, 2)
    assert check_sub_consistency(a, renamed(b, "z"), "LEX").verdict == axioms.VACUOUS


@settings(max_examples=60, deadline=None)
@given(elections(max_agents=3, max_levels=2), st.data())
def test_max_max_matches_literal(e1, data):
    e2 = data.draw(elections(max_agents=3, max_levels=2))
    e2 = Election(e1.agents, e2.levels) if e2.n == e1.n else Election(e1.agents, tuple(
        Level(lev.candidates, lev.k, tuple(lev.utility[0] for _ in e1.agents)) for lev in e2.levels))
    for rule in RULES:
        lit = literal_safe_merge(e1, e2, rule, concat_elections, lambda x, y: x.concat(y))
        assert lit == check_safe_concatenation(e1, e2, rule).holds
    other = disjoint(e1, "z")
    for rule in RULES:
        lit = literal_safe_merge(e1, other, rule, union_elections, lambda x, y: x.union(y))
        assert lit == check_safe_union(e1, other, rule).holds


@settings(max_examples=60, deadline=None)
@given(elections(max_agents=3, max_levels=2), st.data())
def test_union_min_is_min_of_parts(e1, data):
    e2 = disjoint(data.draw(elections(max_agents=3, max_levels=2)), "z")
    if e2.tau != e1.tau:
        return
    u = union_elections(e1, e2)
    for x1 in list(enumerate_valid(e1))[:5]:
        for x2 in list(enumerate_valid(e2))[:5]:
            assert min(agent_scores(u, x1.union(x2))) == min(min(agent_scores(e1, x1)), min(agent_scores(e2, x2)))


def test_restrict_and_split(ex1):
    a, b = split_agents(ex1, 1)
    assert a.agents == ("Ben",) and b.n == 3
    r = restrict(ex1, ["Fina"], [2])
    assert r.levels[0].utility == ((0, 0),)


def test_random_small_suite_yes_cells_sample():
    rng = random.Random(11)
    for _ in range(30):
        e = random_small(rng, max_agents=3, max_levels=3, max_cands=3)
        for rule in ("LEX", "SUM"):
            assert check_pareto(e, rule).holds
