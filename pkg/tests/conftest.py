import numpy as np
import pytest
from hypothesis import settings, strategies as st

from balcut.graph import Graph
from balcut.reference import barbell, cycle_graph, path_graph
from balcut.selfcheck import random_graph

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@st.composite
def graphs(draw, n_max=16):
    """Connected weighted graphs from a seed, via the self-check generator."""
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(np.random.default_rng(seed), n_max)


@st.composite
def graph_and_subset(draw, n_max=16):
    g = draw(graphs(n_max))
    bits = draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n))
    mask = np.array(bits, dtype=bool)
    return g, mask


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def dumbbell():
    return barbell(5, 1)


@pytest.fixture
def path5():
    return path_graph(5)


@pytest.fixture
def cycle8():
    return cycle_graph(8)


@pytest.fixture
def triangle():
    return Graph(3, [0, 1, 2], [1, 2, 0], [1.0, 2.0, 3.0])


# acceptance criteria report: (number, line) pairs appended by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
