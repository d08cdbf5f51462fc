from __future__ import annotations

import pytest
from hypothesis import given

from mixedgraphs.errors import InvalidGraph, UnknownNode
from mixedgraphs.graph import (
    Edge,
    EdgeKind,
    RegressionGraph,
    VKind,
    classify_vs,
    collision_set,
    require_valid,
    subgraph,
    validate,
)

from conftest import graphs


def test_parent_constructor_orders_nodes():
    g = RegressionGraph.parent(3, [(1, 2)])
    assert g.order == (1, 2, 3)
    assert g.parents(1) == [2]
    assert g.past(1) == frozenset({2, 3})
    assert g.is_parent_graph


def test_edge_marks():
    e = Edge(1, 2, EdgeKind.ARROW)
    assert e.mark_at(1) == "head"
    assert e.mark_at(2) == "tail"
    assert Edge(1, 2, EdgeKind.DASHED).mark_at(2) == "dashed"
    assert e.other(1) == 2


def test_arrow_against_order_is_rejected():
    g = RegressionGraph.parent(2, [(2, 1)])
    report = validate(g)
    assert not report.ok
    with pytest.raises(InvalidGraph):
        require_valid(g)


def test_dashed_line_across_blocks_is_rejected():
    g = RegressionGraph.build([[1], [2]], dashed=[(1, 2)])
    assert not validate(g).ok


def test_full_line_only_in_context():
    assert validate(RegressionGraph.build([[1]], [2, 3], full=[(2, 3)])).ok
    assert not validate(RegressionGraph.build([[1, 2]], [3], full=[(1, 2)])).ok


def test_blocks_must_partition_nodes():
    g = RegressionGraph.build([[1, 2], [2, 3]])
    assert not validate(g).ok


def test_vs_of_sink_graph(sink_graph):
    kinds = {(v.inner, v.outer): v.kind for v in classify_vs(sink_graph)}
    assert kinds == {
        (1, (2, 3)): VKind.SINK,
        (3, (1, 5)): VKind.TRANSITION,
        (5, (3, 4)): VKind.SOURCE,
    }


def test_dashed_v_is_a_collision(sur_graph):
    kinds = {(v.inner, v.outer): v.kind for v in classify_vs(sur_graph)}
    assert kinds[(2, (1, 3))].is_collision
    assert kinds[(3, (2, 4))].is_collision


def test_subgraph_keeps_edges_among_nodes(sink_graph):
    sub = subgraph(sink_graph, [1, 2, 3])
    assert sub.nodes == frozenset({1, 2, 3})
    assert {e.pair for e in sub.edges} == {frozenset({1, 2}), frozenset({1, 3})}
    with pytest.raises(UnknownNode):
        subgraph(sink_graph, [1, 9])


@given(graphs(max_d=7))
def test_random_graphs_are_valid(g):
    assert validate(g).ok


@given(graphs(max_d=7))
def test_collisions_have_two_colliding_marks(g):
    for inner, outer in collision_set(g):
        for o in outer:
            assert g.edge(inner, o).mark_at(inner) in {"head", "dashed"}


@given(graphs(max_d=7))
def test_subgraph_of_all_nodes_is_identity(g):
    assert subgraph(g, g.nodes).edges == g.edges
