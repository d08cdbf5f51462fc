"""Brute-force checkers used to validate the matrix engine.

Everything here is exponential in the number of nodes and refuses graphs
with more than ``MAX_NODES`` of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .edges import EdgeMatrix, as_edge_matrix, stack_matrices
from .graph import EdgeKind, RegressionGraph
from .independence import IndepQuery

MAX_NODES = 12
_COLLIDING = frozenset({"head", "dashed"})


@dataclass(frozen=True)
class PathWitness:
    nodes: tuple[int, ...]
    roles: tuple[str, ...]  # one per inner node
    blocked_by: str | None = None

    @property
    def active(self) -> bool:
        return self.blocked_by is None

    def __str__(self) -> str:
        inner = ", ".join(f"{n}:{r}" for n, r in zip(self.nodes[1:-1], self.roles))
        state = "active" if self.active else f"blocked ({self.blocked_by})"
        return f"path {'-'.join(map(str, self.nodes))} [{inner}] {state}"


def _role(graph: RegressionGraph, prev: int, node: int, nxt: int) -> str:
    e1, e2 = graph.edge(prev, node), graph.edge(node, nxt)
    if e1.mark_at(node) in _COLLIDING and e2.mark_at(node) in _COLLIDING:
        return "collision"
    return "transmitting"


def _blocking(nodes, roles, q: IndepQuery | None, opened: frozenset[int] = frozenset()) -> str | None:
    if q is None:
        return None
    for n, r in zip(nodes[1:-1], roles):
        if r == "collision" and n not in opened:
            return f"collision node {n} is neither conditioned on nor anterior to c"
        if r == "transmitting" and n in q.c:
            return f"transmitting node {n} is conditioned on"
    return None


def anteriors_of(graph: RegressionGraph, c: Iterable[int]) -> frozenset[int]:
    """``c`` together with every node that has a path of arrows and full lines
    running towards ``c``; found by plain graph search."""
    out = set(c)
    stack = list(out)
    while stack:
        node = stack.pop()
        for e in graph.incident(node):
            other = e.other(node)
            towards = e.kind is EdgeKind.FULL or (e.kind is EdgeKind.ARROW and e.i == node)
            if towards and other not in out:
                out.add(other)
                stack.append(other)
    return frozenset(out)


def enumerate_paths(
    graph: RegressionGraph, i: int, j: int, max_len: int | None = None, q: IndepQuery | None = None
) -> list[PathWitness]:
    """All simple paths from ``i`` to ``j`` with at most ``max_len`` edges."""
    graph.check_nodes({i, j})
    assert graph.d <= MAX_NODES, "path oracle is limited to small graphs"
    if i == j:
        raise ValueError("path endpoints must differ")
    max_len = graph.d - 1 if max_len is None else max_len
    out: list[PathWitness] = []
    opened = anteriors_of(graph, q.c) if q is not None else frozenset()

    def walk(path: list[int]):
        last = path[-1]
        if last == j:
            roles = tuple(_role(graph, *path[k - 1:k + 2]) for k in range(1, len(path) - 1))
            out.append(PathWitness(tuple(path), roles, _blocking(path, roles, q, opened)))
            return
        if len(path) - 1 >= max_len:
            return
        for nxt in graph.neighbours(last):
            if nxt not in path:
                path.append(nxt)
                walk(path)
                path.pop()

    walk([i])
    return out


def _reach(H: np.ndarray) -> np.ndarray:
    """Reflexive-transitive reachability along ones of a stack of matrices,
    by repeated squaring."""
    R = H.astype(np.int32)
    n = R.shape[-1]
    R |= np.eye(n, dtype=np.int32)
    while True:
        nxt = (R @ R > 0).astype(np.int32)
        if np.array_equal(nxt, R):
            return R.astype(bool)
        R = nxt


class PathSeparatorStack:
    """Path criterion for a stack of graphs sharing one block layout.

    Every simple path from ``alpha`` to ``beta`` whose inner nodes avoid
    ``alpha u beta`` is walked in the graph itself.  A path stays open while
    each collision node on it lies in ``c`` or is anterior to ``c``, and each
    other inner node lies outside ``c``.
    """

    def __init__(self, graphs: Sequence[RegressionGraph]):
        graphs = list(graphs)
        H, W, is_v, order = stack_matrices(graphs)
        assert len(order) <= MAX_NODES, "path oracle is limited to small graphs"
        self.graphs = graphs
        self.nodes = graphs[0].nodes
        self.order = order
        self._pos = {n: k for k, n in enumerate(order)}
        n = len(order)
        off = ~np.eye(n, dtype=bool)
        dashed = W & off
        head = H & off & ~is_v[None, :, None]
        self._adj = off & (H | np.swapaxes(H, -1, -2) | dashed)
        self._coll = head | dashed
        # reach[b, i, j]: j is i itself or one of its anteriors
        self._reach = _reach(H & off)

    def _walk(self, q: IndepQuery, want_witness: bool):
        if q.nodes != self.nodes:
            q = IndepQuery.make(q.alpha, q.beta, q.c, self.nodes)
        adj, coll, pos = self._adj, self._coll, self._pos
        B = adj.shape[0]
        cp = [pos[x] for x in sorted(q.c)]
        opened = self._reach[:, cp, :].any(axis=1) if cp else np.zeros((B, len(self.order)), dtype=bool)
        found = np.zeros(B, dtype=bool)
        witness: list[tuple[int, ...]] = []
        targets = [pos[t] for t in sorted(q.beta)]
        free = [pos[x] for x in sorted(q.c | q.m)]
        in_c = {pos[x] for x in q.c}

        def passes(prev: int, node: int, nxt: int) -> np.ndarray:
            collision = coll[:, node, prev] & coll[:, node, nxt]
            return np.where(collision, opened[:, node], node not in in_c)

        def extend(path: list[int], alive: np.ndarray):
            nonlocal found
            last = path[-1]
            for t in targets:
                ok = alive & adj[:, last, t]
                if len(path) > 1:
                    ok = ok & passes(path[-2], last, t)
                if ok.any():
                    if want_witness and not witness:
                        witness.append(tuple(path + [t]))
                    found |= ok
            for x in free:
                if x in path:
                    continue
                ok = alive & ~found & adj[:, last, x]
                if len(path) > 1:
                    ok = ok & passes(path[-2], last, x)
                if ok.any():
                    path.append(x)
                    extend(path, ok)
                    path.pop()

        for s in sorted(q.alpha):
            extend([pos[s]], ~found)
            if found.all():
                break
        return found, witness

    def separated(self, q: IndepQuery) -> np.ndarray:
        found, _ = self._walk(q, False)
        return ~found

    def active_path(self, q: IndepQuery) -> PathWitness | None:
        """First open path in the first graph of the stack, or ``None``."""
        found, witness = self._walk(q, True)
        if not witness:
            return None
        seq = tuple(self.order[p] for p in witness[0])
        g = self.graphs[0]
        roles = tuple(_role(g, *seq[k - 1:k + 2]) for k in range(1, len(seq) - 1))
        return PathWitness(seq, roles)


class PathSeparator:
    def __init__(self, graph: RegressionGraph):
        self.graph = graph
        self._stack = PathSeparatorStack([graph])

    def separated(self, q: IndepQuery) -> bool:
        return bool(self._stack.separated(q)[0])

    def active_path(self, q: IndepQuery) -> PathWitness | None:
        return self._stack.active_path(q)


def separated_by_paths(graph: RegressionGraph, q: IndepQuery) -> bool:
    """True iff every path between ``alpha`` and ``beta`` is blocked, either
    at a transmitting node in ``c`` or at a collision node that is neither
    in ``c`` nor anterior to it."""
    return PathSeparator(graph).separated(q)


def active_path(graph: RegressionGraph, q: IndepQuery) -> PathWitness | None:
    """An open path, if one exists."""
    return PathSeparator(graph).active_path(q)


def closure_by_paths(M, a: Iterable[int]) -> EdgeMatrix:
    """Add ``(i, j)`` whenever a path ``i -> ... -> j`` along ones of ``M`` has
    every inner node in ``a``."""
    M = as_edge_matrix(M)
    assert len(M.rows) <= MAX_NODES, "path oracle is limited to small graphs"
    inner = set(M.row_positions(a))
    arr = M.entries
    n = arr.shape[0]
    out = arr.copy()
    for i in range(n):
        # depth-first search through inner nodes only
        seen = set()
        stack = [k for k in range(n) if arr[i, k] and k != i]
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            out[i, k] = True
            if k in inner:
                stack.extend(x for x in range(n) if arr[k, x] and x not in seen)
    return EdgeMatrix(out, M.rows)
