import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from robustmatch.graph import Graph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def graphs(draw, max_n=12, bipartite=False):
    """Random simple graphs; with ``bipartite`` the left side is labelled."""
    n = draw(st.integers(min_value=0, max_value=max_n))
    if bipartite:
        nl = draw(st.integers(min_value=0, max_value=n))
        pairs = [(u, v) for u in range(nl) for v in range(nl, n)]
    else:
        nl = None
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=40)) if pairs else []
    return Graph(n, chosen, left=range(nl) if bipartite else None)


def random_graph(rng: np.random.Generator, n: int, p: float, bipartite: bool = False) -> Graph:
    if bipartite:
        nl = n // 2
        edges = [(u, v) for u in range(nl) for v in range(nl, n) if rng.random() < p]
        return Graph(n, edges, left=range(nl))
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph(n, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
