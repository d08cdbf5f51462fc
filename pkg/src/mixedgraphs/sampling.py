"""Random and exhaustive generation of regression graphs."""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .graph import Edge, EdgeKind, RegressionGraph


def _compositions(d: int) -> Iterator[tuple[int, ...]]:
    for cuts in itertools.product((False, True), repeat=max(d - 1, 0)):
        sizes, run = [], 1
        for cut in cuts:
            if cut:
                sizes.append(run)
                run = 1
            else:
                run += 1
        sizes.append(run)
        yield tuple(sizes)


def block_structures(d: int) -> Iterator[tuple[tuple[frozenset[int], ...], frozenset[int]]]:
    """Contiguous block layouts of ``1..d``; the last block may be the context."""
    if d == 0:
        yield (), frozenset()
        return
    for sizes in _compositions(d):
        blocks, start = [], 1
        for s in sizes:
            blocks.append(frozenset(range(start, start + s)))
            start += s
        yield tuple(blocks), frozenset()
        yield tuple(blocks[:-1]), blocks[-1]


def _candidate_edges(responses, context) -> list[Edge]:
    block_of = {}
    for k, g in enumerate(responses):
        for n in g:
            block_of[n] = k
    for n in context:
        block_of[n] = len(responses)
    nodes = sorted(block_of)
    ctx = len(responses)
    out = []
    for i, j in itertools.combinations(nodes, 2):
        bi, bj = block_of[i], block_of[j]
        if bi == bj:
            out.append(Edge(i, j, EdgeKind.FULL if bi == ctx else EdgeKind.DASHED))
        elif bi < bj:
            out.append(Edge(i, j, EdgeKind.ARROW))
        else:
            out.append(Edge(j, i, EdgeKind.ARROW))
    return out


def all_graphs(d: int) -> Iterator[RegressionGraph]:
    """Every regression graph on ``1..d`` with contiguous blocks.

    Up to relabelling this covers every regression graph on ``d`` nodes.
    """
    for responses, context in block_structures(d):
        cands = _candidate_edges(responses, context)
        for mask in range(1 << len(cands)):
            edges = frozenset(e for k, e in enumerate(cands) if mask >> k & 1)
            yield RegressionGraph(frozenset(range(1, d + 1)), responses, context, edges)


def random_graph(
    rng: np.random.Generator,
    d: int,
    density: float = 0.4,
    context_prob: float = 0.5,
    relabel: bool = False,
) -> RegressionGraph:
    """Random valid regression graph on ``d`` nodes."""
    cuts = rng.random(max(d - 1, 0)) < 0.5
    sizes, run = [], 1
    for cut in cuts:
        if cut:
            sizes.append(run)
            run = 1
        else:
            run += 1
    if d:
        sizes.append(run)
    labels = list(range(1, d + 1))
    if relabel:
        labels = [int(x) for x in rng.permutation(labels)]
    blocks, start = [], 0
    for s in sizes:
        blocks.append(frozenset(labels[start:start + s]))
        start += s
    context: frozenset[int] = frozenset()
    if blocks and rng.random() < context_prob:
        context = blocks.pop()
    cands = _candidate_edges(tuple(blocks), context)
    edges = frozenset(e for e in cands if rng.random() < density)
    return RegressionGraph(frozenset(labels), tuple(blocks), context, edges)


def random_parent_graph(rng: np.random.Generator, d: int, density: float = 0.4) -> RegressionGraph:
    arrows = [(i, j) for i, j in itertools.combinations(range(1, d + 1), 2) if rng.random() < density]
    return RegressionGraph.parent(d, arrows)
