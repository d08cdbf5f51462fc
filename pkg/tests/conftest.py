from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mixedgraphs.graph import RegressionGraph
from mixedgraphs.sampling import random_graph

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def graphs(max_d: int = 6, min_d: int = 1, relabel: bool = True):
    """Random valid regression graphs, drawn from a seeded generator."""

    @st.composite
    def build(draw):
        seed = draw(st.integers(0, 2**32 - 1))
        d = draw(st.integers(min_d, max_d))
        density = draw(st.sampled_from([0.2, 0.4, 0.7]))
        rng = np.random.default_rng(seed)
        return random_graph(rng, d, density=density, relabel=relabel)

    return build()


def bool_matrices(max_n: int = 7):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_n))
        seed = draw(st.integers(0, 2**32 - 1))
        p = draw(st.sampled_from([0.15, 0.3, 0.5]))
        arr = np.random.default_rng(seed).random((n, n)) < p
        np.fill_diagonal(arr, True)
        return arr

    return build()


@pytest.fixture
def sink_graph() -> RegressionGraph:
    """Five ordered nodes: source node 5, transition node 3, sink node 1."""
    return RegressionGraph.parent(5, [(1, 2), (1, 3), (3, 5), (4, 5)])


@pytest.fixture
def glucose_graph() -> RegressionGraph:
    """Y=1, X=2, Z=3, W=4 with the direction-preserving path Y <- X <- Z <- W."""
    return RegressionGraph.parent(4, [(1, 2), (1, 4), (2, 3), (3, 4)])


@pytest.fixture
def sur_graph() -> RegressionGraph:
    """1 -> 2 -- 3 <- 4, responses 2 and 3 jointly regressed on 1 and 4."""
    return RegressionGraph.build([[2, 3], [1, 4]], arrows=[(2, 1), (3, 4)], dashed=[(2, 3)])
