"""Independence statements implied by a regression graph.

A query ``alpha _||_ beta | c`` partitions the nodes into ``alpha``,
``beta``, the conditioning set ``c`` and the marginalised rest ``m``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .edges import EdgeMatrix, Engine, hmatrix, partial_closure, stack_matrices
from .errors import InvalidPartition
from .graph import Edge, EdgeKind, RegressionGraph, collision_set, require_valid


@dataclass(frozen=True)
class IndepQuery:
    alpha: frozenset[int]
    beta: frozenset[int]
    c: frozenset[int]
    nodes: frozenset[int]

    @classmethod
    def make(
        cls,
        alpha: Iterable[int],
        beta: Iterable[int],
        c: Iterable[int] = (),
        nodes: Iterable[int] | None = None,
    ) -> "IndepQuery":
        al, be, cc = frozenset(alpha), frozenset(beta), frozenset(c)
        if not al or not be:
            raise InvalidPartition("both sides of a query must be nonempty")
        if al & be or al & cc or be & cc:
            raise InvalidPartition("query sets must be disjoint")
        ns = al | be | cc if nodes is None else frozenset(nodes)
        if not al | be | cc <= ns:
            raise InvalidPartition(f"query uses nodes {sorted((al | be | cc) - ns)} outside the graph")
        return cls(al, be, cc, ns)

    @property
    def m(self) -> frozenset[int]:
        return self.nodes - self.alpha - self.beta - self.c

    def for_graph(self, graph: RegressionGraph) -> "IndepQuery":
        return IndepQuery.make(self.alpha, self.beta, self.c, graph.nodes)

    def __str__(self) -> str:
        def fmt(s):
            return ",".join(str(n) for n in sorted(s))

        out = f"{fmt(self.alpha)} _||_ {fmt(self.beta)}"
        return out + (f" | {fmt(self.c)}" if self.c else "")


# -- anterior graphs -------------------------------------------------------------


@dataclass(frozen=True)
class AnteriorGraph:
    """Graph whose arrows join each node to all of its ``a``-line anteriors.

    ``matrix`` is the closed edge matrix; ``graph`` is the same structure as
    a regression graph, with the base graph's dashed lines kept.
    """

    base: RegressionGraph
    a: frozenset[int]
    matrix: EdgeMatrix
    graph: RegressionGraph


def anterior_graph(graph: RegressionGraph, a: Iterable[int]) -> AnteriorGraph:
    require_valid(graph)
    a = graph.check_nodes(a)
    K = partial_closure(hmatrix(graph), a)
    edges = set(graph.edges_of(EdgeKind.DASHED))
    for i, j in K.ones():
        if i in graph.context and j in graph.context:
            edges.add(Edge(i, j, EdgeKind.FULL))
        else:
            edges.add(Edge(i, j, EdgeKind.ARROW))
    g = RegressionGraph(graph.nodes, graph.responses, graph.context, frozenset(edges))
    return AnteriorGraph(graph, a, K, g)


# -- separation --------------------------------------------------------------------


class SeparatorStack:
    """Separation queries on a stack of graphs that share one block layout.

    Answers are boolean arrays with one entry per graph.  Closures are
    cached, so asking many queries of the same stack is cheap.
    """

    def __init__(self, graphs: Sequence[RegressionGraph]):
        graphs = list(graphs)
        H, W, is_v, order = stack_matrices(graphs)
        self.graphs = graphs
        self.nodes = graphs[0].nodes
        self.order = order
        self.engine = Engine(H, W, is_v)
        self._pos = {n: k for k, n in enumerate(order)}
        self._induced: dict[frozenset[int], tuple] = {}

    def _bind(self, q: IndepQuery) -> IndepQuery:
        return q if q.nodes == self.nodes else IndepQuery.make(q.alpha, q.beta, q.c, self.nodes)

    def _positions(self, nodes) -> list[int]:
        return sorted(self._pos[n] for n in nodes)

    def separated(self, q: IndepQuery) -> np.ndarray:
        q = self._bind(q)
        keep = self.engine.anterior_mask(self._positions(q.alpha | q.beta | q.c))
        M = self.engine.closed_on(keep, self._positions(q.m))
        rows, cols = self._positions(q.alpha), self._positions(q.beta)
        return ~M[:, rows][:, :, cols].any(axis=(1, 2))

    def induced(self, a: frozenset[int]) -> tuple[list[int], list[int], tuple]:
        hit = self._induced.get(a)
        if hit is None:
            pa = self._positions(a)
            pb = self._positions(self.nodes - a)
            hit = self._induced[a] = (pa, pb, self.engine.induced(pa, pb))
        return hit

    def separated_by_matrix(self, q: IndepQuery) -> np.ndarray:
        q = self._bind(q)
        pa, pb, (_, nab, _) = self.induced(q.alpha | q.m)
        ra = {p: k for k, p in enumerate(pa)}
        rb = {p: k for k, p in enumerate(pb)}
        rows = [ra[p] for p in self._positions(q.alpha)]
        cols = [rb[p] for p in self._positions(q.beta)]
        return ~nab[:, rows][:, :, cols].any(axis=(1, 2))


class Separator:
    """Answers many queries on one graph, sharing closures between them."""

    def __init__(self, graph: RegressionGraph):
        self.graph = graph
        self._stack = SeparatorStack([graph])

    def separated(self, q: IndepQuery) -> bool:
        return bool(self._stack.separated(q)[0])

    def separated_by_matrix(self, q: IndepQuery) -> bool:
        return bool(self._stack.separated_by_matrix(q)[0])


def separated(graph: RegressionGraph, q: IndepQuery) -> bool:
    """True iff the graph implies ``alpha _||_ beta | c``.

    The graph is restricted to the anteriors of ``alpha``, ``beta`` and
    ``c``; there every arrow and dashed line is turned into lines of a
    concentration graph, and the query holds iff closing that graph over the
    marginalised nodes leaves ``alpha`` and ``beta`` unconnected.
    """
    return Separator(graph).separated(q)


def separated_by_matrix(graph: RegressionGraph, q: IndepQuery) -> bool:
    """Same question, read off the induced regression of ``alpha u m`` on ``beta u c``."""
    return Separator(graph).separated_by_matrix(q)


# -- Markov equivalence ---------------------------------------------------------------


def markov_equivalent(g1: RegressionGraph, g2: RegressionGraph) -> bool:
    require_valid(g1)
    require_valid(g2)
    return (
        g1.nodes == g2.nodes
        and g1.skeleton() == g2.skeleton()
        and collision_set(g1) == collision_set(g2)
    )


# -- singleton transitivity ------------------------------------------------------------------


def singleton_transitivity_check(
    graph: RegressionGraph, i: int, j: int, h: int, c: Iterable[int] = (), sep: Separator | None = None
) -> bool:
    """Truth of: (i _||_ j | c and i _||_ j | c+h) implies (i _||_ h | c or j _||_ h | c)."""
    c = frozenset(c)
    if len({i, j, h}) != 3 or c & {i, j, h}:
        raise InvalidPartition("i, j, h must be distinct and outside c")
    graph.check_nodes({i, j, h} | c)
    sep = sep or Separator(graph)

    def holds(x, y, cond):
        return sep.separated(IndepQuery.make({x}, {y}, cond, graph.nodes))

    if not (holds(i, j, c) and holds(i, j, c | {h})):
        return True
    return holds(i, h, c) or holds(j, h, c)


def all_queries(nodes: Iterable[int]):
    """Every query on ``nodes`` once, with ``alpha`` holding the smallest
    node of ``alpha u beta``."""
    nodes = sorted(nodes)
    for labels in itertools.product(range(4), repeat=len(nodes)):
        al = frozenset(n for n, t in zip(nodes, labels) if t == 0)
        be = frozenset(n for n, t in zip(nodes, labels) if t == 1)
        if not al or not be or min(al) > min(be):
            continue
        cc = frozenset(n for n, t in zip(nodes, labels) if t == 2)
        yield IndepQuery(al, be, cc, frozenset(nodes))
