"""Binary edge matrices and the closure calculus on them.

An edge matrix has a one in position ``(i, j)`` when ``i`` and ``j`` are
coupled (and on the diagonal).  Rows and columns are labelled by node ids, so
submatrices keep track of which nodes they refer to.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import (
    DimensionMismatch,
    InvalidGraph,
    InvalidSplit,
    NegativeEntry,
    NotSymmetric,
    NotTriangular,
    UnknownNode,
)
from .graph import EdgeKind, RegressionGraph, require_valid


class EdgeMatrix:
    """Boolean matrix with node labels for its rows and columns."""

    __slots__ = ("entries", "rows", "cols", "_rpos", "_cpos")

    def __init__(self, entries, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None):
        arr = np.array(entries, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatch("edge matrix must be two-dimensional")
        if rows is None:
            rows = range(1, arr.shape[0] + 1)
        rows = tuple(int(r) for r in rows)
        cols = rows if cols is None else tuple(int(c) for c in cols)
        if arr.shape != (len(rows), len(cols)):
            raise DimensionMismatch(f"entries of shape {arr.shape} do not match {len(rows)}x{len(cols)} labels")
        arr.setflags(write=False)
        self.entries = arr
        self.rows = rows
        self.cols = cols
        self._rpos = {n: k for k, n in enumerate(rows)}
        self._cpos = {n: k for k, n in enumerate(cols)}

    @property
    def order(self) -> tuple[int, ...]:
        if self.rows != self.cols:
            raise DimensionMismatch("rectangular edge matrix has no single order")
        return self.rows

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def row_positions(self, nodes: Iterable[int]) -> list[int]:
        try:
            return [self._rpos[n] for n in nodes]
        except KeyError as exc:
            raise UnknownNode(f"node {exc.args[0]} is not a row of this matrix") from None

    def col_positions(self, nodes: Iterable[int]) -> list[int]:
        try:
            return [self._cpos[n] for n in nodes]
        except KeyError as exc:
            raise UnknownNode(f"node {exc.args[0]} is not a column of this matrix") from None

    def __getitem__(self, key: tuple[int, int]) -> bool:
        i, j = key
        return bool(self.entries[self._rpos[i], self._cpos[j]])

    def sub(self, rows: Sequence[int], cols: Sequence[int] | None = None) -> "EdgeMatrix":
        cols = rows if cols is None else cols
        r, c = self.row_positions(rows), self.col_positions(cols)
        return EdgeMatrix(self.entries[np.ix_(r, c)], rows, cols)

    @property
    def T(self) -> "EdgeMatrix":
        return EdgeMatrix(self.entries.T, self.cols, self.rows)

    def ones(self, off_diagonal: bool = True) -> set[tuple[int, int]]:
        out = set()
        for r, c in zip(*np.nonzero(self.entries)):
            i, j = self.rows[r], self.cols[c]
            if off_diagonal and i == j:
                continue
            out.add((i, j))
        return out

    def to_lists(self) -> list[list[int]]:
        return self.entries.astype(int).tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, EdgeMatrix):
            return NotImplemented
        return self.rows == other.rows and self.cols == other.cols and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"EdgeMatrix(rows={self.rows}, cols={self.cols},\n{self.entries.astype(int)})"


def as_edge_matrix(M, order: Sequence[int] | None = None) -> EdgeMatrix:
    if isinstance(M, EdgeMatrix):
        return M
    return EdgeMatrix(M, order)


def _square(M: EdgeMatrix) -> EdgeMatrix:
    if not M.is_square:
        raise DimensionMismatch("operation needs a square edge matrix")
    return M


# -- elementary operators ---------------------------------------------------


def indicator(M) -> EdgeMatrix:
    """One wherever the input is positive.  Labels are kept if present."""
    if isinstance(M, EdgeMatrix):
        return M
    arr = np.asarray(M)
    if arr.size and np.any(arr < 0):
        raise NegativeEntry("indicator needs a nonnegative matrix")
    return EdgeMatrix(arr > 0)


def _close(arr: np.ndarray, positions: Iterable[int]) -> np.ndarray:
    """In-place single-node eliminations; broadcasts over leading axes."""
    for k in positions:
        arr |= arr[..., :, k, None] & arr[..., None, k, :]
    return arr


def partial_closure(M, a: Iterable[int]) -> EdgeMatrix:
    """Close every path whose inner nodes all lie in ``a``.

    Nodes of ``a`` are eliminated one at a time in ascending id order.  Ones
    are never removed.
    """
    M = _square(as_edge_matrix(M))
    nodes = sorted(set(a))
    pos = M.row_positions(nodes)
    arr = M.entries.copy()
    _close(arr, pos)
    return EdgeMatrix(arr, M.rows)


def ancestor_closure(A) -> EdgeMatrix:
    """Transitive closure of a parent graph's edge matrix by reachability."""
    A = _square(as_edge_matrix(A))
    arr = A.entries
    n = arr.shape[0]
    if n and (not arr.diagonal().all() or np.tril(arr, -1).any()):
        raise NotTriangular("expected a unit upper-triangular edge matrix")
    out = np.eye(n, dtype=bool)
    # rows are finished from the last node backwards; a node's ancestors are
    # its parents plus their (already known) ancestors
    for i in range(n - 1, -1, -1):
        for j in np.nonzero(arr[i, i + 1:])[0] + i + 1:
            out[i] |= out[j]
    return EdgeMatrix(out, A.rows)


def component_closure(W) -> EdgeMatrix:
    """Complete every connected component of an undirected edge matrix."""
    W = _square(as_edge_matrix(W))
    arr = W.entries
    if not np.array_equal(arr, arr.T):
        raise NotSymmetric("expected a symmetric edge matrix")
    n = arr.shape[0]
    if n == 0:
        return EdgeMatrix(arr, W.rows)
    _, labels = connected_components(arr.astype(np.int8), directed=False)
    return EdgeMatrix(labels[:, None] == labels[None, :], W.rows)


def _bool_mm(*mats: np.ndarray) -> np.ndarray:
    # float32 products are exact for counts below 2**24
    out = mats[0]
    for m in mats[1:]:
        out = (out.astype(np.float32) @ m.astype(np.float32)) > 0
    return out


def induced_overall(A) -> tuple[EdgeMatrix, EdgeMatrix]:
    """Overall covariance and concentration graphs of a parent graph."""
    A = _square(as_edge_matrix(A))
    anc = ancestor_closure(A).entries
    cov = _bool_mm(anc, anc.T)
    conc = _bool_mm(A.entries.T, A.entries)
    return EdgeMatrix(cov, A.rows), EdgeMatrix(conc, A.rows)


def submatrix_exchange_check(M, a: Iterable[int], keep: Iterable[int]) -> bool:
    M = _square(as_edge_matrix(M))
    a, keep = set(a), list(keep)
    if not a <= set(keep):
        raise InvalidSplit("closure set must lie inside the kept nodes")
    left = partial_closure(M, a).sub(keep)
    right = partial_closure(M.sub(keep), a)
    return left == right


# -- edge matrices of a graph ---------------------------------------------------


def hmatrix(graph: RegressionGraph) -> EdgeMatrix:
    """Arrows (row = child) and full lines, plus the unit diagonal."""
    require_valid(graph)
    pos = graph.position
    arr = np.eye(graph.d, dtype=bool)
    for e in graph.edges:
        if e.kind is EdgeKind.ARROW:
            arr[pos[e.i], pos[e.j]] = True
        elif e.kind is EdgeKind.FULL:
            arr[pos[e.i], pos[e.j]] = arr[pos[e.j], pos[e.i]] = True
    return EdgeMatrix(arr, graph.order)


def wmatrix(graph: RegressionGraph) -> EdgeMatrix:
    """Dashed lines plus the unit diagonal; identity on the context block."""
    require_valid(graph)
    pos = graph.position
    arr = np.eye(graph.d, dtype=bool)
    for e in graph.edges_of(EdgeKind.DASHED):
        arr[pos[e.i], pos[e.j]] = arr[pos[e.j], pos[e.i]] = True
    return EdgeMatrix(arr, graph.order)


def amatrix(graph: RegressionGraph) -> EdgeMatrix:
    """Edge matrix of a graph made of arrows only."""
    if any(e.kind is not EdgeKind.ARROW for e in graph.edges):
        raise InvalidGraph("only graphs with arrows alone have a triangular edge matrix")
    return hmatrix(graph)


# -- induced graphs for a split N = (a, b) ---------------------------------------


@dataclass(frozen=True)
class InducedEdgeSet:
    """Edge matrices for regressing ``X_a`` on ``X_b``.

    ``aa_given_b``  dashed lines among responses (zero: i _||_ j | b)
    ``a_given_b``   arrows from regressors to responses (zero: i _||_ j | b minus j)
    ``bb_dot_a``    full lines among regressors (zero: i _||_ j | b minus {i, j})
    """

    a: tuple[int, ...]
    b: tuple[int, ...]
    aa_given_b: EdgeMatrix
    a_given_b: EdgeMatrix
    bb_dot_a: EdgeMatrix


def _infer_context(H: np.ndarray) -> np.ndarray:
    sym = H & np.swapaxes(H, -1, -2)
    n = H.shape[-1]
    sym &= ~np.eye(n, dtype=bool)
    return sym.any(axis=-1).reshape(-1, n).any(axis=0)


def _blk(X: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    return X[..., rows, :][..., cols]


class Engine:
    """Induced edge matrices for a stack of graphs sharing one node order.

    ``H`` and ``W`` have shape ``(B, n, n)``; ``is_v`` marks the context
    block, common to the whole stack.  Every result carries the leading
    batch axis.  Node sets are given as positions.
    """

    def __init__(self, H: np.ndarray, W: np.ndarray, is_v: np.ndarray | None = None):
        H = np.asarray(H, dtype=bool)
        W = np.asarray(W, dtype=bool)
        if H.ndim == 2:
            H, W = H[None], W[None]
        if H.shape != W.shape or H.shape[-1] != H.shape[-2]:
            raise DimensionMismatch("H and W must be square stacks of equal shape")
        self.H = H
        self.W = W
        self.B, self.n = H.shape[0], H.shape[-1]
        self.is_v = _infer_context(H) if is_v is None else np.asarray(is_v, dtype=bool)
        self._anterior: np.ndarray | None = None
        self._conc: dict[bytes, np.ndarray] = {}
        self._closed: dict[tuple[bytes, bytes], np.ndarray] = {}

    @property
    def anterior(self) -> np.ndarray:
        """``(B, n, n)``: entry ``(i, j)`` set when ``j`` is an anterior of ``i``."""
        if self._anterior is None:
            self._anterior = _close(self.H.copy(), range(self.n))
        return self._anterior

    def anterior_mask(self, positions: Sequence[int]) -> np.ndarray:
        """``(B, n)`` mask of the given nodes and all their anteriors."""
        mask = np.zeros((self.B, self.n), dtype=bool)
        positions = list(positions)
        if positions:
            mask |= self.anterior[:, positions, :].any(axis=1)
            mask[:, positions] = True
        return mask

    def concentration_on(self, keep: np.ndarray) -> np.ndarray:
        """Concentration edge matrix of the kept (anterior-closed) nodes after
        marginalising over the rest; rows and columns outside ``keep`` are
        zero."""
        key = keep.tobytes()
        hit = self._conc.get(key)
        if hit is not None:
            return hit
        km = keep[:, :, None] & keep[:, None, :]
        H = self.H & km
        V = _close(self.W & km, range(self.n))
        v = self.is_v
        V[:, v, :] = False
        V[:, :, v] = False
        conc = _bool_mm(np.swapaxes(H, -1, -2), V, H)
        vv = v[:, None] & v[None, :]
        conc |= H & vv
        self._conc[key] = conc
        return conc

    def closed_on(self, keep: np.ndarray, inner: Sequence[int]) -> np.ndarray:
        """``concentration_on(keep)`` closed over the positions ``inner``."""
        key = (keep.tobytes(), np.asarray(sorted(inner), dtype=np.int64).tobytes())
        hit = self._closed.get(key)
        if hit is None:
            hit = self._closed[key] = _close(self.concentration_on(keep).copy(), inner)
        return hit

    def compatible(self, pa: Sequence[int], pb: Sequence[int]) -> np.ndarray:
        """``(B,)``: no node of ``a`` is a parent or full-line neighbour of ``b``."""
        if not pa or not pb:
            return np.ones(self.B, dtype=bool)
        return ~_blk(self.H, pb, pa).any(axis=(1, 2))

    def products(self, pa: Sequence[int], pb: Sequence[int]):
        H, W, v = self.H, self.W, self.is_v
        K = _close(H.copy(), pa)
        V = _close(W.copy(), pb)
        u = ~v
        Q = np.where(u[:, None] & u[None, :], V, False) | np.where(v[:, None] & v[None, :], K, False)
        Kaa = _blk(K, pa, pa)
        naa = _bool_mm(Kaa, _blk(Q, pa, pa), np.swapaxes(Kaa, -1, -2))
        nab = _blk(K, pa, pb) | _bool_mm(Kaa, _blk(V, pa, pb), _blk(K, pb, pb))
        keep = np.zeros((self.B, self.n), dtype=bool)
        keep[:, list(pb)] = True
        nbb = _blk(self.concentration_on(keep), pb, pb)
        return naa, nab, nbb

    def by_anteriors(self, pa: Sequence[int], pb: Sequence[int]):
        pa, pb = list(pa), list(pb)
        ant_b = self.anterior_mask(pb)
        nbb = _blk(self.closed_on(ant_b, pa), pb, pb)
        nab = np.zeros((self.B, len(pa), len(pb)), dtype=bool)
        naa = np.broadcast_to(np.eye(len(pa), dtype=bool), (self.B, len(pa), len(pa))).copy()
        single = {i: self.anterior_mask([i]) for i in pa}
        for r, i in enumerate(pa):
            M = self.closed_on(ant_b | single[i], pa)
            nab[:, r, :] = M[:, i, pb]
            for s in range(r + 1, len(pa)):
                j = pa[s]
                M2 = self.closed_on(ant_b | single[i] | single[j], pa)
                naa[:, r, s] = naa[:, s, r] = M2[:, i, j]
        return naa, nab, nbb

    def induced(self, pa: Sequence[int], pb: Sequence[int], method: str = "auto"):
        """``(naa, nab, nbb)`` stacks for the split into positions ``pa``, ``pb``."""
        if method not in ("auto", "products", "anterior"):
            raise ValueError(f"unknown method {method!r}")
        if method == "products":
            return self.products(pa, pb)
        if method == "anterior":
            return self.by_anteriors(pa, pb)
        ok = self.compatible(pa, pb)
        if ok.all():
            return self.products(pa, pb)
        if not ok.any():
            return self.by_anteriors(pa, pb)
        prod, ante = self.products(pa, pb), self.by_anteriors(pa, pb)
        sel = ok[:, None, None]
        return tuple(np.where(sel, x, y) for x, y in zip(prod, ante))


def _split(H: EdgeMatrix, a: Iterable[int]) -> tuple[list[int], list[int]]:
    a_set = set(a)
    unknown = a_set - set(H.rows)
    if unknown:
        raise InvalidSplit(f"nodes {sorted(unknown)} are not in the matrix")
    pa = [k for k, n in enumerate(H.rows) if n in a_set]
    pb = [k for k, n in enumerate(H.rows) if n not in a_set]
    return pa, pb


def induced_regression(
    H,
    W,
    a: Iterable[int],
    context: Iterable[int] | None = None,
    method: str = "auto",
) -> InducedEdgeSet:
    """Induced edge matrices for marginalising over ``a`` within the response
    and conditioning on ``b = N \\ a``.

    ``method='products'`` closes the anterior graph over ``a``, the dashed
    graph over ``b`` and multiplies the pieces together; this is exact when no
    node of ``a`` is an anterior of a node of ``b``.  ``method='anterior'``
    works for every split: each entry is read from the concentration graph
    of the relevant anterior set, closed over the marginalised nodes.
    ``'auto'`` picks the products whenever they apply.

    ``context`` names the context block; if omitted it is taken to be the
    nodes that carry full lines, which is equivalent for every formula here.
    """
    H, W = as_edge_matrix(H), as_edge_matrix(W)
    _square(H)
    _square(W)
    if H.rows != W.rows:
        raise DimensionMismatch("H and W must share one node order")
    is_v = None if context is None else np.array([n in set(context) for n in H.rows], dtype=bool)
    pa, pb = _split(H, a)
    naa, nab, nbb = Engine(H.entries, W.entries, is_v).induced(pa, pb, method)
    an = tuple(H.rows[p] for p in pa)
    bn = tuple(H.rows[p] for p in pb)
    return InducedEdgeSet(an, bn, EdgeMatrix(naa[0], an), EdgeMatrix(nab[0], an, bn), EdgeMatrix(nbb[0], bn))


def graph_matrices(graph: RegressionGraph) -> tuple[EdgeMatrix, EdgeMatrix]:
    return hmatrix(graph), wmatrix(graph)


def induced_for_graph(graph: RegressionGraph, a: Iterable[int], method: str = "auto") -> InducedEdgeSet:
    a = graph.check_nodes(a)
    H, W = graph_matrices(graph)
    return induced_regression(H, W, a, context=graph.context, method=method)


def stack_matrices(graphs: Sequence[RegressionGraph]) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple[int, ...]]:
    """``(H, W, is_v, order)`` stacks for graphs with identical blocks."""
    if not graphs:
        raise ValueError("need at least one graph")
    first = graphs[0]
    order = first.order
    d = len(order)
    H = np.broadcast_to(np.eye(d, dtype=bool), (len(graphs), d, d)).copy()
    W = H.copy()
    for b, g in enumerate(graphs):
        if g.responses != first.responses or g.context != first.context:
            raise InvalidGraph("stacked graphs must share their block structure")
        require_valid(g)
        pos = g.position
        for e in g.edges:
            i, j = pos[e.i], pos[e.j]
            if e.kind is EdgeKind.ARROW:
                H[b, i, j] = True
            elif e.kind is EdgeKind.FULL:
                H[b, i, j] = H[b, j, i] = True
            else:
                W[b, i, j] = W[b, j, i] = True
    is_v = np.array([n in first.context for n in order], dtype=bool)
    return H, W, is_v, order


def anterior_sets(graph: RegressionGraph) -> dict[int, frozenset[int]]:
    """Anteriors of every node: reachable against arrows and along full lines."""
    H = hmatrix(graph)
    K = partial_closure(H, graph.nodes)
    return {i: frozenset(j for j in K.cols if j != i and K[i, j]) for i in K.rows}
