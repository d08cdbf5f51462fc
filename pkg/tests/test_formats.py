from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given

from mixedgraphs.edges import induced_for_graph
from mixedgraphs.errors import InvalidPartition, ParseError
from mixedgraphs.formats import (
    emit_dot,
    emit_graph,
    graph_json,
    parse_graph,
    parse_matrix,
    parse_query,
    text_grid,
)
from mixedgraphs.graph import RegressionGraph
from mixedgraphs.sampling import random_graph

from conftest import graphs

SINK = """\
# five ordered nodes
nodes: 5
arrow 1 < 2
arrow 1 < 3
arrow 3 < 5
arrow 4 < 5
"""


def test_parse_sink_graph(sink_graph):
    assert parse_graph(SINK) == sink_graph


def test_parse_blocks_and_edge_kinds(sur_graph):
    text = "nodes: 4\nblocks: g1={2,3}; g2={1,4}; v={}\narrow 2 < 1\narrow 3 < 4\ndashed 2 -- 3\n"
    assert parse_graph(text) == sur_graph
    g = parse_graph("nodes: 3\nblocks: g1={1}; v={2,3}\nfull 2 - 3\n")
    assert g.context == frozenset({2, 3})


def test_edgeless_graph():
    g = parse_graph("nodes: 3\n")
    assert not g.edges and g.order == (1, 2, 3)


def test_whitespace_is_ignored():
    assert parse_graph("  nodes :  2\n\n arrow   1<2   # comment\n").adjacent(1, 2)


@pytest.mark.parametrize(
    "text, line",
    [
        ("nodes: 5\narrow 4 < 1\n", 2),
        ("nodes: 2\nfrob 1 2\n", 2),
        ("nodes: 2\narrow 1 -- 2\n", 2),
        ("arrow 1 < 2\n", 1),
        ("nodes: 2\narrow 1 < x\n", 2),
        ("nodes: 2\narrow 1 < 2\ndashed 1 -- 2\n", 3),
    ],
)
def test_parse_errors_carry_lines(text, line):
    with pytest.raises(ParseError) as err:
        parse_graph(text)
    assert err.value.line == line


@given(graphs(max_d=7, relabel=False))
def test_emit_then_parse_is_identity(g):
    text = emit_graph(g)
    assert parse_graph(text) == g
    assert emit_graph(parse_graph(text)) == text


def test_emit_is_canonical(sink_graph):
    text = emit_graph(sink_graph)
    assert text.splitlines()[1] == "blocks: g1={1}; g2={2}; g3={3}; g4={4}; g5={5}; v={}"
    assert emit_graph(parse_graph(SINK)) == text


def test_queries():
    q = parse_query("2 _||_ 3 | 4")
    assert (q.alpha, q.beta, q.c) == ({2}, {3}, {4})
    q = parse_query("1,2 _||_ 5")
    assert (q.alpha, q.beta, q.c) == ({1, 2}, {5}, frozenset())
    with pytest.raises(InvalidPartition):
        parse_query("1 _||_ 1 | 2")
    with pytest.raises(ParseError):
        parse_query("1 and 2")


def test_dot_of_graph(sink_graph):
    dot = emit_dot(sink_graph)
    assert dot.count("->") == 4 and "dir=none" not in dot
    assert "  2 -> 1;" in dot
    empty = emit_dot(RegressionGraph.parent(2))
    assert "->" not in empty and "  1;" in empty


def test_dot_of_induced_concentration_graph(sink_graph):
    dot = emit_dot(induced_for_graph(sink_graph, []))
    lines = [l for l in dot.splitlines() if "->" in l]
    assert len(lines) == 5
    assert "  2 -> 3 [dir=none];" in lines


def test_dashed_style(sur_graph):
    assert "[dir=none, style=dashed]" in emit_dot(sur_graph)


def test_matrix_files():
    arr, order = parse_matrix('{"order": [3, 1], "matrix": [[1, 0], [1, 1]]}')
    assert order == (3, 1) and arr[1, 0] == 1
    arr, order = parse_matrix("1 0 0\n0 1 0\n0 0 1\n")
    assert order == (1, 2, 3) and np.array_equal(arr, np.eye(3))
    with pytest.raises(ParseError):
        parse_matrix("1 0\n1\n")
    with pytest.raises(ParseError):
        parse_matrix('{"matrix": [[1, 2, 3]]}')


def test_json_and_grid(sink_graph):
    data = graph_json(sink_graph)
    assert json.loads(json.dumps(data))["edges"][0] == {"kind": "arrow", "i": 1, "j": 2}
    ind = induced_for_graph(sink_graph, [])
    grid = text_grid(ind.bb_dot_a).splitlines()
    assert grid[0].split() == ["1", "2", "3", "4", "5"]
    assert grid[2].split() == ["2", "1", "1", "1", "0", "0"]


def test_relabelled_graphs_need_consecutive_labels():
    rng = np.random.default_rng(1)
    g = random_graph(rng, 4, relabel=True)
    assert parse_graph(emit_graph(g)) == g
