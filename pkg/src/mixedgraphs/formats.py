"""Text formats: graph files, query strings, DOT and JSON output.

Graph files look like::

    # comments start with a hash
    nodes: 5
    blocks: g1={1}; g2={2}; g3={3}; g4={4}; g5={5}; v={}
    arrow 1 < 2        # 1 <- 2, node 2 is in the past of node 1
    dashed 3 -- 4
    full 4 - 5

``nodes: d`` declares nodes ``1..d``.  Without a ``blocks`` line every node
is its own response block in the order ``1..d`` (a parent graph).
"""

from __future__ import annotations

import json
import re
from typing import Sequence

import numpy as np

from .edges import EdgeMatrix, InducedEdgeSet
from .errors import ParseError
from .graph import Edge, EdgeKind, RegressionGraph, validate
from .independence import IndepQuery

_NODES = re.compile(r"nodes\s*:\s*(\S.*)$")
_BLOCKS = re.compile(r"blocks\s*:\s*(.*)$")
_BLOCK = re.compile(r"^\s*(g\d+|v)\s*=\s*\{([^}]*)\}\s*$")
_EDGE = re.compile(r"^(arrow|dashed|full)\s+(\S+?)\s*(<|--|-)\s*(\S+)$")
_SYMBOL = {"arrow": "<", "dashed": "--", "full": "-"}
_KIND = {"arrow": EdgeKind.ARROW, "dashed": EdgeKind.DASHED, "full": EdgeKind.FULL}


def _int(text: str, line: int, col: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"expected a node number, got {text!r}", line, col) from None


def _node_list(text: str, line: int, col: int) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part:
            out.append(_int(part, line, col))
    return out


def parse_graph(text: str) -> RegressionGraph:
    """Parse and validate a graph file; any problem raises :class:`ParseError`."""
    d: int | None = None
    blocks: list[tuple[str, list[int], int]] = []
    edges: list[tuple[Edge, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        col = len(body) - len(body.lstrip()) + 1
        if m := _NODES.match(stripped):
            if d is not None:
                raise ParseError("'nodes' declared twice", lineno, col)
            d = _int(m.group(1).strip(), lineno, col + m.start(1))
            if d < 0:
                raise ParseError("node count must be nonnegative", lineno, col + m.start(1))
            continue
        if m := _BLOCKS.match(stripped):
            if blocks:
                raise ParseError("'blocks' declared twice", lineno, col)
            offset = col + m.start(1)
            for part in m.group(1).split(";"):
                if not part.strip():
                    continue
                bm = _BLOCK.match(part)
                if not bm:
                    raise ParseError(f"malformed block {part.strip()!r}", lineno, offset)
                blocks.append((bm.group(1), _node_list(bm.group(2), lineno, offset), lineno))
                offset += len(part) + 1
            continue
        compact = re.sub(r"\s+", " ", stripped)
        if m := _EDGE.match(compact):
            kind, left, sym, right = m.groups()
            if sym != _SYMBOL[kind]:
                raise ParseError(f"{kind} edges use {_SYMBOL[kind]!r}, not {sym!r}", lineno, col)
            i, j = _int(left, lineno, col), _int(right, lineno, col)
            edges.append((Edge(i, j, _KIND[kind]), lineno))
            continue
        raise ParseError(f"unrecognised line {stripped!r}", lineno, col)

    if d is None:
        raise ParseError("missing 'nodes: d' declaration", 1, 1)
    nodes = frozenset(range(1, d + 1))
    if blocks:
        names = [name for name, _, _ in blocks]
        resp_names = [n for n in names if n != "v"]
        expected = [f"g{k}" for k in range(1, len(resp_names) + 1)]
        if resp_names != expected or names.count("v") > 1 or ("v" in names and names[-1] != "v"):
            raise ParseError("blocks must be g1, g2, ... in order, optionally followed by v", blocks[0][2], 1)
        responses = tuple(frozenset(ns) for name, ns, _ in blocks if name != "v")
        context = frozenset(next((ns for name, ns, _ in blocks if name == "v"), []))
    else:
        responses = tuple(frozenset([k]) for k in range(1, d + 1))
        context = frozenset()
    graph = RegressionGraph(nodes, responses, context, frozenset(e for e, _ in edges))
    seen: dict[frozenset[int], int] = {}
    for e, lineno in edges:
        if e.pair in seen:
            raise ParseError(f"second edge between {sorted(e.pair)}", lineno, 1)
        seen[e.pair] = lineno
    report = validate(graph)
    if not report.ok:
        first_line = edges[0][1] if edges else 1
        for e, lineno in edges:
            label = f"{e.i} {_SYMBOL[e.kind.value]} {e.j}"
            if any(label in v for v in report.violations):
                first_line = lineno
                break
        raise ParseError("invalid graph: " + "; ".join(report.violations), first_line, 1)
    return graph


def _fmt_set(nodes) -> str:
    return ",".join(str(n) for n in sorted(nodes))


def emit_graph(graph: RegressionGraph) -> str:
    """Canonical graph file text."""
    if graph.nodes != frozenset(range(1, graph.d + 1)):
        raise ValueError("graph files need nodes labelled 1..d")
    lines = [f"nodes: {graph.d}"]
    parts = [f"g{k + 1}={{{_fmt_set(g)}}}" for k, g in enumerate(graph.responses)]
    parts.append(f"v={{{_fmt_set(graph.context)}}}")
    lines.append("blocks: " + "; ".join(parts))
    for e in sorted(graph.edges, key=Edge.sort_key):
        lines.append(f"{e.kind.value} {e.i} {_SYMBOL[e.kind.value]} {e.j}")
    return "\n".join(lines) + "\n"


# -- queries ---------------------------------------------------------------------

_QUERY = re.compile(r"^\s*([^|_]*?)\s*_\|\|_\s*([^|]*?)\s*(?:\|\s*(.*?)\s*)?$")


def _query_set(text: str, col: int) -> list[int]:
    text = text.strip()
    if text.startswith("{") and text.endswith("}"):
        text = text[1:-1]
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise ParseError(f"expected a node number, got {part!r}", 1, col) from None
    return out


def parse_query(text: str, nodes: Sequence[int] | None = None) -> IndepQuery:
    """Parse ``alpha _||_ beta | c``; node lists are comma-separated."""
    m = _QUERY.match(text)
    if not m:
        raise ParseError(f"query {text!r} does not match 'A _||_ B | C'", 1, 1)
    alpha = _query_set(m.group(1), m.start(1) + 1)
    beta = _query_set(m.group(2), m.start(2) + 1)
    cond = _query_set(m.group(3) or "", (m.start(3) if m.group(3) else len(text)) + 1)
    if not alpha or not beta:
        raise ParseError("both sides of '_||_' need at least one node", 1, 1)
    return IndepQuery.make(alpha, beta, cond, nodes)


def parse_node_list(text: str) -> list[int]:
    return _query_set(text, 1)


# -- DOT ---------------------------------------------------------------------


def _dot(nodes, arrows, dashed, full, name: str) -> str:
    out = [f"digraph {name} {{", "  node [shape=circle];"]
    for n in sorted(nodes):
        out.append(f"  {n};")
    for child, parent in sorted(arrows):
        out.append(f"  {parent} -> {child};")
    for i, j in sorted(dashed):
        out.append(f"  {i} -> {j} [dir=none, style=dashed];")
    for i, j in sorted(full):
        out.append(f"  {i} -> {j} [dir=none];")
    out.append("}")
    return "\n".join(out) + "\n"


def emit_dot(obj, name: str = "G") -> str:
    """DOT text for a graph or for the graph of an induced edge set."""
    if isinstance(obj, RegressionGraph):
        arrows = [(e.i, e.j) for e in obj.edges_of(EdgeKind.ARROW)]
        dashed = [(e.i, e.j) for e in obj.edges_of(EdgeKind.DASHED)]
        full = [(e.i, e.j) for e in obj.edges_of(EdgeKind.FULL)]
        return _dot(obj.nodes, arrows, dashed, full, name)
    if isinstance(obj, InducedEdgeSet):
        dashed = sorted((min(i, j), max(i, j)) for i, j in obj.aa_given_b.ones() if i < j)
        full = sorted((min(i, j), max(i, j)) for i, j in obj.bb_dot_a.ones() if i < j)
        arrows = sorted(obj.a_given_b.ones(off_diagonal=False))
        return _dot(set(obj.a) | set(obj.b), arrows, dashed, full, name)
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")


# -- JSON ----------------------------------------------------------------------------


def matrix_json(M: EdgeMatrix) -> dict:
    if M.is_square:
        return {"order": list(M.rows), "matrix": M.to_lists()}
    return {"rows": list(M.rows), "cols": list(M.cols), "matrix": M.to_lists()}


def induced_json(ind: InducedEdgeSet) -> dict:
    return {
        "a": list(ind.a),
        "b": list(ind.b),
        "aa_given_b": matrix_json(ind.aa_given_b),
        "a_given_b": matrix_json(ind.a_given_b),
        "bb_dot_a": matrix_json(ind.bb_dot_a),
    }


def graph_json(graph: RegressionGraph) -> dict:
    return {
        "nodes": sorted(graph.nodes),
        "blocks": [sorted(g) for g in graph.responses],
        "context": sorted(graph.context),
        "edges": [
            {"kind": e.kind.value, "i": e.i, "j": e.j} for e in sorted(graph.edges, key=Edge.sort_key)
        ],
    }


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def parse_matrix(text: str) -> tuple[np.ndarray, tuple[int, ...]]:
    """Read ``{"order": [...], "matrix": [[...]]}`` or whitespace-separated rows."""
    stripped = text.strip()
    if stripped.startswith("{") or stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", exc.lineno, exc.colno) from None
        if isinstance(data, dict):
            rows = data.get("matrix")
            order = data.get("order")
        else:
            rows, order = data, None
        try:
            arr = np.array(rows, dtype=float)
        except (TypeError, ValueError):
            raise ParseError("matrix entries must be numbers", 1, 1) from None
    else:
        parsed = []
        for lineno, line in enumerate(stripped.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                parsed.append([float(x) for x in line.replace(",", " ").split()])
            except ValueError:
                raise ParseError("matrix entries must be numbers", lineno, 1) from None
        if len({len(r) for r in parsed}) > 1:
            raise ParseError("matrix rows differ in length", 1, 1)
        arr = np.array(parsed, dtype=float)
        order = None
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ParseError("matrix must be square", 1, 1)
    order = tuple(range(1, arr.shape[0] + 1)) if order is None else tuple(int(x) for x in order)
    if len(order) != arr.shape[0]:
        raise ParseError("order length does not match the matrix", 1, 1)
    return arr, order


def text_grid(M: EdgeMatrix) -> str:
    """Aligned 0/1 grid with node labels."""
    width = max([len(str(n)) for n in M.rows + M.cols] + [1])
    head = " " * (width + 1) + " ".join(str(c).rjust(width) for c in M.cols)
    lines = [head]
    for r, row in zip(M.rows, M.to_lists()):
        lines.append(str(r).rjust(width) + " " + " ".join(str(x).rjust(width) for x in row))
    return "\n".join(lines) + "\n"
