"""Symmetric binary variables generated over regression graphs.

Each variable takes levels -1 and +1.  A response block ``g`` given its past
has, for every dashed component ``C`` of ``g``, the conditional probability

    prod_{i in C} (1 + x_i mu_i) / 2  +  omega * prod_{i in C} x_i / 2**|C|

with ``mu_i = sum_j eta_ij x_j`` over the parents ``j`` of ``i``.  For a
singleton ``C`` this is the main-effect form ``(1 + x_i mu_i) / 2``; for a
dashed pair ``omega`` is the conditional covariance of the two responses.
Context nodes are uniform and mutually independent.

Tables are dense arrays of ``2**d`` probabilities.  Nodes are ranked by
ascending label; the node of rank ``k`` is bit ``k`` of the cell index, with
level ``+1`` as bit 0 and ``-1`` as bit 1.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import InvalidPartition, InvalidProbability, NotRealizable, SingularBlock, UnknownNode, UnsupportedStructure
from .graph import EdgeKind, RegressionGraph, require_valid
from .independence import IndepQuery

PROB_TOL = 1e-10
MAX_TABLE_NODES = 16


def level_matrix(d: int) -> np.ndarray:
    """``(2**d, d)`` array of levels for every cell, in table order."""
    idx = np.arange(1 << d)[:, None]
    bits = (idx >> np.arange(d)[None, :]) & 1
    return 1 - 2 * bits


@dataclass
class SymBinaryModel:
    """Regression coefficients ``eta[(child, parent)]`` and, for dashed pairs,
    conditional covariances ``omega[(i, j)]`` with ``i < j``."""

    graph: RegressionGraph
    eta: dict[tuple[int, int], float] = field(default_factory=dict)
    omega: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        g = require_valid(self.graph)
        if g.d > MAX_TABLE_NODES:
            raise UnsupportedStructure(f"tables are limited to {MAX_TABLE_NODES} nodes")
        if g.edges_of(EdgeKind.FULL):
            raise UnsupportedStructure("full lines in the context block are not generated by this family")
        for comp in self.components():
            if len(comp) > 2:
                raise UnsupportedStructure(f"dashed component {sorted(comp)} has more than two nodes")
        self.eta = {(int(i), int(j)): float(v) for (i, j), v in self.eta.items()}
        self.omega = {tuple(sorted((int(i), int(j)))): float(v) for (i, j), v in self.omega.items()}
        for (i, j), v in self.eta.items():
            e = g.edge(i, j)
            if (e is None or e.kind is not EdgeKind.ARROW or e.i != i) and v != 0:
                raise NotRealizable(f"coefficient eta[{i},{j}] is set but {i} <- {j} is not an arrow")
        for (i, j), v in self.omega.items():
            e = g.edge(i, j)
            if (e is None or e.kind is not EdgeKind.DASHED) and v != 0:
                raise NotRealizable(f"covariance omega[{i},{j}] is set but {i} -- {j} is not a dashed line")

    def components(self) -> list[frozenset[int]]:
        """Dashed components of every response block, in declared order."""
        g = self.graph
        out = []
        for block in g.responses:
            nodes = sorted(block)
            where = {n: k for k, n in enumerate(nodes)}
            adj = np.zeros((len(nodes), len(nodes)), dtype=np.int8)
            for e in g.edges_of(EdgeKind.DASHED):
                if e.i in where and e.j in where:
                    adj[where[e.i], where[e.j]] = adj[where[e.j], where[e.i]] = 1
            _, labels = connected_components(adj, directed=False)
            for lab in sorted(set(labels.tolist())):
                out.append(frozenset(n for n, l in zip(nodes, labels) if l == lab))
        return out

    def to_json(self) -> str:
        data = {"eta": {f"{i}<-{j}": v for (i, j), v in sorted(self.eta.items())}}
        if self.omega:
            data["omega"] = {f"{i}--{j}": v for (i, j), v in sorted(self.omega.items())}
        return json.dumps(data, indent=2, sort_keys=True)


@dataclass
class JointTable:
    """Exact joint distribution of ``d`` symmetric binary variables."""

    nodes: tuple[int, ...]
    probs: np.ndarray

    @property
    def d(self) -> int:
        return len(self.nodes)

    def rank(self, node: int) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise UnknownNode(f"node {node} is not in the table") from None

    def levels(self) -> np.ndarray:
        return level_matrix(self.d)

    def moment(self, nodes: Iterable[int]) -> float:
        """``E(prod X_i)`` over the given nodes."""
        cols = [self.rank(n) for n in nodes]
        prod = self.levels()[:, cols].prod(axis=1)
        return float(self.probs @ prod)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        # flipping every level complements every bit
        flipped = self.probs[::-1]
        return bool(np.all(np.abs(self.probs - flipped) <= tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{n}" for n in self.nodes] + ["p"])
        for lv, p in zip(self.levels(), self.probs):
            w.writerow([int(x) for x in lv] + [repr(float(p))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"nodes": list(self.nodes), "probs": [float(p) for p in self.probs]}, indent=2)


def _parent_sum(model: SymBinaryModel, node: int, X: np.ndarray, rank: Mapping[int, int]) -> np.ndarray:
    mu = np.zeros(X.shape[0])
    for parent in model.graph.parents(node):
        coef = model.eta.get((node, parent), 0.0)
        if coef:
            mu += coef * X[:, rank[parent]]
    return mu


def _assignment(X_row: np.ndarray, nodes: Sequence[int], which: Iterable[int]) -> dict[int, int]:
    rank = {n: k for k, n in enumerate(nodes)}
    return {n: int(X_row[rank[n]]) for n in sorted(which)}


def build_table(model: SymBinaryModel) -> JointTable:
    """Multiply the conditional probabilities of every block given its past."""
    g = model.graph
    nodes = tuple(sorted(g.nodes))
    rank = {n: k for k, n in enumerate(nodes)}
    X = level_matrix(len(nodes)).astype(float)
    probs = np.ones(X.shape[0])
    for comp in model.components():
        members = sorted(comp)
        mus = {i: _parent_sum(model, i, X, rank) for i in members}
        factor = np.ones(X.shape[0])
        for i in members:
            factor *= (1 + X[:, rank[i]] * mus[i]) / 2
        if len(members) == 2:
            i, j = members
            factor += model.omega.get((i, j), 0.0) * X[:, rank[i]] * X[:, rank[j]] / 4
        bad = np.nonzero(factor < -PROB_TOL)[0]
        if bad.size:
            row = X[bad[0]]
            past = set().union(*(g.parents(i) for i in members))
            raise InvalidProbability(
                f"conditional probability {factor[bad[0]]:.4g} < 0 for nodes {members}",
                _assignment(row, nodes, set(members) | past),
            )
        probs *= np.clip(factor, 0.0, None)
    probs /= 2 ** len(g.context)
    return JointTable(nodes, probs)


def correlation(table: JointTable, i: int, j: int) -> float:
    """``E(X_i X_j)``: the correlation, since every margin is uniform."""
    table.rank(i)
    table.rank(j)
    return table.moment([i, j]) if i != j else 1.0


def correlation_matrix(table: JointTable) -> np.ndarray:
    X = table.levels().astype(float)
    return (X * table.probs[:, None]).T @ X


def eta_from_sigma(
    Sigma,
    graph: RegressionGraph,
    order: Sequence[int] | None = None,
    tol: float = 1e-10,
) -> SymBinaryModel:
    """Coefficients of the model over ``graph`` that reproduces the
    correlation matrix ``Sigma`` (rows in ``order``, default ascending labels).

    Each block is regressed on its past; dashed pairs take the residual
    covariances.  Values at missing edges must vanish within ``tol``.
    """
    require_valid(graph)
    S = np.asarray(Sigma, dtype=float)
    order = tuple(sorted(graph.nodes)) if order is None else tuple(order)
    if S.shape != (len(order), len(order)) or set(order) != graph.nodes:
        raise InvalidPartition("Sigma and order must cover exactly the graph's nodes")
    if not np.allclose(np.diag(S), 1.0, atol=tol):
        raise NotRealizable("Sigma must have unit diagonal")
    pos = {n: k for k, n in enumerate(order)}
    eta: dict[tuple[int, int], float] = {}
    omega: dict[tuple[int, int], float] = {}
    ctx = sorted(graph.context)
    for i in ctx:
        for j in ctx:
            if i < j and abs(S[pos[i], pos[j]]) > tol:
                raise NotRealizable(f"context nodes {i}, {j} are correlated")
    for block in graph.responses:
        g_nodes = sorted(block)
        past = sorted(graph.past(g_nodes[0]))
        gi = [pos[n] for n in g_nodes]
        pi = [pos[n] for n in past]
        if pi:
            Spp = S[np.ix_(pi, pi)]
            try:
                coef = np.linalg.solve(Spp, S[np.ix_(pi, gi)]).T
            except np.linalg.LinAlgError:
                raise SingularBlock(f"covariance of the past of {g_nodes} is singular") from None
            resid = S[np.ix_(gi, gi)] - coef @ S[np.ix_(pi, gi)]
        else:
            coef = np.zeros((len(gi), 0))
            resid = S[np.ix_(gi, gi)]
        for r, i in enumerate(g_nodes):
            for c, j in enumerate(past):
                v = float(coef[r, c])
                e = graph.edge(i, j)
                if e is not None and e.kind is EdgeKind.ARROW:
                    eta[(i, j)] = v
                elif abs(v) > tol:
                    raise NotRealizable(f"coefficient of {i} on {j} is {v:.3g} but {i} <- {j} is missing")
            for s in range(r + 1, len(g_nodes)):
                j = g_nodes[s]
                v = float(resid[r, s])
                if graph.adjacent(i, j):
                    omega[(i, j)] = v
                elif abs(v) > tol:
                    raise NotRealizable(f"residual covariance of {i}, {j} is {v:.3g} but {i} -- {j} is missing")
    return SymBinaryModel(graph, eta, omega)


# -- independence in tables -----------------------------------------------------------


def _axes_array(probs: np.ndarray, d: int) -> np.ndarray:
    """Reshape ``(..., 2**d)`` into ``(..., 2, ..., 2)`` with axis ``k`` = rank ``k``."""
    lead = probs.shape[:-1]
    arr = probs.reshape(lead + (2,) * d)
    nl = len(lead)
    # C order puts the most significant bit first; reverse the node axes
    perm = list(range(nl)) + [nl + d - 1 - k for k in range(d)]
    return arr.transpose(perm)


def independence_in_probs(probs: np.ndarray, nodes: Sequence[int], q: IndepQuery, tol: float = PROB_TOL) -> np.ndarray:
    """Vectorised check over leading axes of ``probs``; returns a boolean array."""
    nodes = tuple(nodes)
    d = len(nodes)
    if q.nodes != frozenset(nodes):
        q = IndepQuery.make(q.alpha, q.beta, q.c, nodes)
    rank = {n: k for k, n in enumerate(nodes)}
    probs = np.asarray(probs, dtype=float)
    lead = probs.shape[:-1]
    nl = len(lead)
    arr = _axes_array(probs, d)
    al = sorted(rank[n] for n in q.alpha)
    be = sorted(rank[n] for n in q.beta)
    cc = sorted(rank[n] for n in q.c)
    keep = al + be + cc
    drop = tuple(nl + k for k in range(d) if k not in keep)
    marg = arr.sum(axis=drop) if drop else arr
    # remaining axes are in ascending rank; bring them to (alpha, beta, c)
    remaining = sorted(keep)
    perm = list(range(nl)) + [nl + remaining.index(k) for k in keep]
    marg = marg.transpose(perm)
    shape = lead + (1 << len(al), 1 << len(be), 1 << len(cc))
    joint = marg.reshape(shape)
    pc = joint.sum(axis=(-3, -2))
    pa = joint.sum(axis=-2)
    pb = joint.sum(axis=-3)
    safe = np.where(pc > tol, pc, 1.0)
    cond = joint / safe[..., None, None, :]
    fa = pa / safe[..., None, :]
    fb = pb / safe[..., None, :]
    diff = np.abs(cond - fa[..., :, None, :] * fb[..., None, :, :])
    diff = np.where((pc > tol)[..., None, None, :], diff, 0.0)
    return diff.reshape(lead + (-1,)).max(axis=-1) <= tol


def independence_in_table(table: JointTable, q: IndepQuery, tol: float = PROB_TOL) -> bool:
    """True iff ``f(alpha, beta | c) = f(alpha | c) f(beta | c)`` for every
    level of ``c`` with positive probability."""
    return bool(independence_in_probs(table.probs, table.nodes, q, tol))
