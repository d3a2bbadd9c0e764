import json
import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from egalseq.model import Election, Level, election_from_dict
from egalseq.oracle import gen_example1

DATA = Path(__file__).parent / "data"

# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)


def load_fixture(name):
    doc = json.loads((DATA / f"{name}.json").read_text())
    return doc, [election_from_dict(d) for d in doc["elections"]]


def random_small(rng, max_agents=5, max_levels=4, max_cands=4, umax=3, kvals=(1, 2)):
    """The oracle-scale suite: n <= 5, tau <= 4, <= 4 candidates per level."""
    n = rng.randint(1, max_agents)
    levels = []
    for t in range(rng.randint(1, max_levels)):
        m = rng.randint(1, max_cands)
        k = min(rng.choice(kvals), m)
        util = tuple(tuple(rng.randint(0, umax) for _ in range(m)) for _ in range(n))
        levels.append(Level(tuple(f"c{t}_{j}" for j in range(m)), k, util))
    return Election(tuple(f"a{i}" for i in range(n)), tuple(levels))


def suite(seed=2024, count=500, **kw):
    rng = random.Random(seed)
    return [random_small(rng, **kw) for _ in range(count)]


@st.composite
def elections(draw, max_agents=4, max_levels=3, max_cands=3, umax=3, kmax=2):
    n = draw(st.integers(1, max_agents))
    tau = draw(st.integers(1, max_levels))
    levels = []
    for t in range(tau):
        m = draw(st.integers(1, max_cands))
        k = draw(st.integers(0 if kmax == 0 else 1, min(kmax, m)))
        row = st.tuples(*[st.integers(0, umax)] * m)
        util = tuple(draw(st.lists(row, min_size=n, max_size=n)))
        levels.append(Level(tuple(f"c{t}_{j}" for j in range(m)), k, util))
    return Election(tuple(f"a{i}" for i in range(n)), tuple(levels))


@pytest.fixture
def ex1():
    return gen_example1()
