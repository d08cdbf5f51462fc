"""Regression graphs: ordered blocks, three edge kinds, V classification.

A regression graph orders its nodes into response blocks ``g1, ..., gK``
followed by a context block ``v``.  The past of a block is everything after
it.  Edges come in three kinds:

* ``ARROW``  ``i <- j``: ``j`` lies in the past of ``i``'s block.
* ``DASHED`` ``i -- j``: both ends in the same response block.
* ``FULL``   ``i - j``: both ends in the context block.

Parent graphs are the special case of singleton response blocks and arrows
only; concentration graphs put every node in the context block and use full
lines; covariance graphs put every node in one response block and use dashed
lines.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .errors import InvalidGraph, UnknownNode


class EdgeKind(enum.Enum):
    ARROW = "arrow"
    DASHED = "dashed"
    FULL = "full"


_KIND_RANK = {EdgeKind.ARROW: 0, EdgeKind.DASHED: 1, EdgeKind.FULL: 2}


@dataclass(frozen=True)
class Edge:
    """One edge.  For arrows ``i`` is the child and ``j`` the parent;
    lines are stored with ``i < j``."""

    i: int
    j: int
    kind: EdgeKind

    def __post_init__(self):
        if self.kind is not EdgeKind.ARROW and self.i > self.j:
            a, b = self.j, self.i
            object.__setattr__(self, "i", a)
            object.__setattr__(self, "j", b)

    @property
    def pair(self) -> frozenset[int]:
        return frozenset((self.i, self.j))

    def mark_at(self, node: int) -> str:
        """End mark at ``node``: 'head', 'tail', 'dashed' or 'full'."""
        if self.kind is EdgeKind.ARROW:
            return "head" if node == self.i else "tail"
        return "dashed" if self.kind is EdgeKind.DASHED else "full"

    def other(self, node: int) -> int:
        return self.j if node == self.i else self.i

    def sort_key(self) -> tuple[int, int, int]:
        return (_KIND_RANK[self.kind], self.i, self.j)


class VKind(enum.Enum):
    SOURCE = "source"
    TRANSITION = "transition"
    SINK = "sink"
    COLLISION = "collision"
    TRANSMITTING = "transmitting"

    @property
    def is_collision(self) -> bool:
        return self in (VKind.SINK, VKind.COLLISION)


@dataclass(frozen=True)
class VClass:
    inner: int
    outer: tuple[int, int]
    kind: VKind

    @property
    def is_collision(self) -> bool:
        return self.kind.is_collision


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class RegressionGraph:
    nodes: frozenset[int]
    responses: tuple[frozenset[int], ...]
    context: frozenset[int]
    edges: frozenset[Edge]

    # -- construction -------------------------------------------------

    @classmethod
    def build(
        cls,
        responses: Iterable[Iterable[int]] = (),
        context: Iterable[int] = (),
        arrows: Iterable[tuple[int, int]] = (),
        dashed: Iterable[tuple[int, int]] = (),
        full: Iterable[tuple[int, int]] = (),
        nodes: Iterable[int] | None = None,
    ) -> "RegressionGraph":
        """Assemble a graph; arrows are ``(child, parent)`` pairs."""
        resp = tuple(frozenset(g) for g in responses)
        ctx = frozenset(context)
        if nodes is None:
            node_set = frozenset().union(*resp, ctx)
        else:
            node_set = frozenset(nodes)
        edges = [Edge(i, j, EdgeKind.ARROW) for i, j in arrows]
        edges += [Edge(i, j, EdgeKind.DASHED) for i, j in dashed]
        edges += [Edge(i, j, EdgeKind.FULL) for i, j in full]
        return cls(node_set, resp, ctx, frozenset(edges))

    @classmethod
    def parent(cls, d: int, arrows: Iterable[tuple[int, int]] = ()) -> "RegressionGraph":
        """Parent graph over ``1..d`` in that order; arrows as ``(child, parent)``."""
        return cls.build([[k] for k in range(1, d + 1)], (), arrows=arrows)

    @classmethod
    def concentration(cls, d: int, lines: Iterable[tuple[int, int]] = ()) -> "RegressionGraph":
        return cls.build((), range(1, d + 1), full=lines)

    @classmethod
    def covariance(cls, d: int, lines: Iterable[tuple[int, int]] = ()) -> "RegressionGraph":
        return cls.build([range(1, d + 1)] if d else [], (), dashed=lines)

    # -- derived structure --------------------------------------------

    @cached_property
    def order(self) -> tuple[int, ...]:
        """Declared node order: blocks in sequence, ascending inside a block."""
        seq: list[int] = []
        for g in self.responses:
            seq.extend(sorted(g))
        seq.extend(sorted(self.context))
        return tuple(seq)

    @cached_property
    def position(self) -> dict[int, int]:
        return {n: k for k, n in enumerate(self.order)}

    @cached_property
    def block_index(self) -> dict[int, int]:
        """Block number per node; the context block gets ``len(responses)``."""
        idx: dict[int, int] = {}
        for k, g in enumerate(self.responses):
            for n in g:
                idx.setdefault(n, k)
        for n in self.context:
            idx.setdefault(n, len(self.responses))
        return idx

    @cached_property
    def response_nodes(self) -> frozenset[int]:
        return frozenset().union(*self.responses) if self.responses else frozenset()

    @cached_property
    def _incident(self) -> dict[int, list[Edge]]:
        inc: dict[int, list[Edge]] = {n: [] for n in self.nodes}
        for e in sorted(self.edges, key=Edge.sort_key):
            inc.setdefault(e.i, []).append(e)
            inc.setdefault(e.j, []).append(e)
        return inc

    @cached_property
    def _pair_edge(self) -> dict[frozenset[int], Edge]:
        return {e.pair: e for e in self.edges}

    @property
    def d(self) -> int:
        return len(self.nodes)

    def check_nodes(self, nodes: Iterable[int]) -> frozenset[int]:
        s = frozenset(nodes)
        missing = s - self.nodes
        if missing:
            raise UnknownNode(f"unknown node(s) {sorted(missing)}")
        return s

    def edge(self, i: int, j: int) -> Edge | None:
        return self._pair_edge.get(frozenset((i, j)))

    def adjacent(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self._pair_edge

    def incident(self, node: int) -> list[Edge]:
        return self._incident.get(node, [])

    def neighbours(self, node: int) -> list[int]:
        return sorted(e.other(node) for e in self.incident(node))

    def parents(self, node: int) -> list[int]:
        return sorted(e.j for e in self.incident(node) if e.kind is EdgeKind.ARROW and e.i == node)

    def past(self, node: int) -> frozenset[int]:
        k = self.block_index[node]
        out = set(self.context) if k < len(self.responses) else set()
        for g in self.responses[k + 1:]:
            out |= g
        return frozenset(out)

    def edges_of(self, kind: EdgeKind) -> list[Edge]:
        return sorted((e for e in self.edges if e.kind is kind), key=Edge.sort_key)

    def skeleton(self) -> frozenset[frozenset[int]]:
        return frozenset(e.pair for e in self.edges)

    @property
    def is_parent_graph(self) -> bool:
        return (
            all(len(g) == 1 for g in self.responses)
            and all(e.kind is EdgeKind.ARROW for e in self.edges)
            and len(self.context) <= 1
        )

    def __repr__(self) -> str:
        blocks = "; ".join(f"g{k + 1}={sorted(g)}" for k, g in enumerate(self.responses))
        edges = ", ".join(_edge_str(e) for e in sorted(self.edges, key=Edge.sort_key))
        return f"RegressionGraph({blocks}; v={sorted(self.context)} | {edges})"


def _edge_str(e: Edge) -> str:
    sym = {EdgeKind.ARROW: "<", EdgeKind.DASHED: "--", EdgeKind.FULL: "-"}[e.kind]
    return f"{e.i} {sym} {e.j}"


# -- validation ---------------------------------------------------------


def validate(graph: RegressionGraph) -> ValidationReport:
    """List every violated well-formedness rule; empty iff the graph is valid."""
    report = ValidationReport()
    out = report.violations
    seen: dict[int, int] = {}
    blocks = list(graph.responses) + [graph.context]
    for k, g in enumerate(blocks):
        if k < len(graph.responses) and not g:
            out.append(f"response block g{k + 1} is empty")
        for n in sorted(g):
            if n in seen:
                out.append(f"node {n} appears in more than one block")
            seen[n] = k
    for n in sorted(graph.nodes - seen.keys()):
        out.append(f"node {n} is not assigned to a block")
    for n in sorted(seen.keys() - graph.nodes):
        out.append(f"block member {n} is not a declared node")

    pairs: dict[frozenset[int], int] = {}
    for e in sorted(graph.edges, key=Edge.sort_key):
        label = _edge_str(e)
        if e.i == e.j:
            out.append(f"self-loop at node {e.i}")
            continue
        if e.i not in graph.nodes or e.j not in graph.nodes:
            out.append(f"edge {label} uses an undeclared node")
            continue
        pairs[e.pair] = pairs.get(e.pair, 0) + 1
        if e.i not in seen or e.j not in seen:
            continue
        bi, bj = seen[e.i], seen[e.j]
        ctx = len(graph.responses)
        if e.kind is EdgeKind.ARROW:
            if bi == ctx:
                out.append(f"arrow {label} points into the past")
            elif bj < bi:
                out.append(f"arrow {label} points into the past")
            elif bj == bi:
                out.append(f"arrow {label} joins nodes of the same block")
        elif e.kind is EdgeKind.DASHED:
            if bi != bj:
                out.append(f"dashed edge {label} crosses block boundary")
            elif bi == ctx:
                out.append(f"dashed edge {label} lies in the context block")
        else:
            if bi != ctx or bj != ctx:
                out.append(f"full line {label} lies outside the context block")
    for pair, count in sorted(pairs.items(), key=lambda t: sorted(t[0])):
        if count > 1:
            out.append(f"pair {sorted(pair)} carries {count} edges")
    return report


def require_valid(graph: RegressionGraph) -> RegressionGraph:
    report = validate(graph)
    if not report.ok:
        raise InvalidGraph("invalid regression graph: " + "; ".join(report.violations), report.violations)
    return graph


# -- V classification ---------------------------------------------------

_COLLIDING_MARKS = frozenset({"head", "dashed"})


def v_kind(first: Edge, second: Edge, inner: int) -> VKind:
    """Kind of the V formed by two edges meeting at ``inner``."""
    m1, m2 = first.mark_at(inner), second.mark_at(inner)
    if first.kind is EdgeKind.ARROW and second.kind is EdgeKind.ARROW:
        if m1 == m2 == "head":
            return VKind.SINK
        if m1 == m2 == "tail":
            return VKind.SOURCE
        return VKind.TRANSITION
    if m1 in _COLLIDING_MARKS and m2 in _COLLIDING_MARKS:
        return VKind.COLLISION
    return VKind.TRANSMITTING


def classify_vs(graph: RegressionGraph) -> list[VClass]:
    """Every induced 3-node, 2-edge subgraph, once, ordered by inner node."""
    require_valid(graph)
    out: list[VClass] = []
    for o in sorted(graph.nodes):
        inc = graph.incident(o)
        for e1, e2 in itertools.combinations(inc, 2):
            x, y = e1.other(o), e2.other(o)
            if graph.adjacent(x, y):
                continue
            if x > y:
                x, y, e1, e2 = y, x, e2, e1
            out.append(VClass(o, (x, y), v_kind(e1, e2, o)))
    return out


def collision_set(graph: RegressionGraph) -> frozenset[tuple[int, frozenset[int]]]:
    return frozenset((v.inner, frozenset(v.outer)) for v in classify_vs(graph) if v.is_collision)


def subgraph(graph: RegressionGraph, keep: Iterable[int]) -> RegressionGraph:
    """Restrict nodes, edges and blocks to ``keep``; emptied response blocks vanish."""
    keep_set = graph.check_nodes(keep)
    resp = tuple(g & keep_set for g in graph.responses if g & keep_set)
    edges = frozenset(e for e in graph.edges if e.i in keep_set and e.j in keep_set)
    return RegressionGraph(keep_set, resp, graph.context & keep_set, edges)
