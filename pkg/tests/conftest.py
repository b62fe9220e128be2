import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

from netal.graphs import Graph
from netal.sampler import ExplicitDistribution

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
ARTIFACTS_DIR = Path(__file__).resolve().parent.parent / "artifacts"


@st.composite
def graph_strategy(draw, max_n=8, directed=None, allow_self_loops=None, min_n=1):
    n = draw(st.integers(min_n, max_n))
    if directed is None:
        directed = draw(st.booleans())
    if allow_self_loops is None:
        allow_self_loops = draw(st.booleans())
    possible = [
        (u, v)
        for u in range(n)
        for v in range(n)
        if (directed or u <= v) and (allow_self_loops or u != v)
    ]
    if possible:
        edges = draw(st.lists(st.sampled_from(possible), unique=True, max_size=len(possible)))
    else:
        edges = []
    return Graph.from_edges(n, edges, directed, allow_self_loops)


def random_graph(rng, n, directed, allow_self_loops=False, p=0.5):
    edges = []
    for u in range(n):
        for v in range(n):
            if not directed and v < u:
                continue
            if u == v and not allow_self_loops:
                continue
            if rng.random() < p:
                edges.append((u, v))
    return Graph.from_edges(n, edges, directed, allow_self_loops)


@pytest.fixture(scope="session")
def karate():
    import netal

    graph = netal.load_edge_list((DATA_DIR / "karate_edges.txt").read_text(), directed=False)
    labels = netal.load_labels((DATA_DIR / "karate_labels.tsv").read_text(), graph)
    return graph, labels


@pytest.fixture(scope="session")
def toy_locked_trio():
    """Six vertices, two types: 0,1,2 always share a type; 3,4,5 are fair
    independent coins.  16 equiprobable assignments."""
    states = []
    for bits in itertools.product([0, 1], repeat=4):
        states.append([bits[0]] * 3 + list(bits[1:]))
    return ExplicitDistribution(
        assignments=np.array(states), probs=np.full(16, 1 / 16), k=2
    )
