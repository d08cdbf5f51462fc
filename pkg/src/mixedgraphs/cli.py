"""Command-line front end.

Exit status is 0 on success, 1 for usage errors and 2 when the input is
well-formed but the requested operation fails (invalid graph, singular
pivot and the like).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import formats
from .binary import SymBinaryModel, build_table
from .edges import EdgeMatrix, indicator, induced_for_graph, partial_closure
from .errors import MixedGraphError, UnsupportedStructure
from .gaussian import ZERO_TOL, partial_inversion, structural_zero_audit
from .graph import EdgeKind, classify_vs, validate
from .independence import markov_equivalent, separated


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _graph(args):
    if not args.graph:
        raise UsageError("--graph FILE is required")
    return formats.parse_graph(_read(args.graph))


def _set(text: str | None) -> list[int]:
    return [] if text is None else formats.parse_node_list(text)


def _emit(args, data, text: str | None = None, dot: str | None = None) -> str:
    if args.out == "dot":
        if dot is None:
            raise UsageError("this command has no DOT output")
        return dot
    if args.out == "text" and text is not None:
        return text
    return formats.dumps(data)


def cmd_validate(args) -> str:
    g = _graph(args)
    report = validate(g)
    data = {"valid": report.ok, "violations": report.violations}
    return _emit(args, data, "valid\n" if report.ok else "\n".join(report.violations) + "\n", formats.emit_dot(g))


def cmd_vs(args) -> str:
    g = _graph(args)
    vs = classify_vs(g)
    data = [{"inner": v.inner, "outer": list(v.outer), "kind": v.kind.value} for v in vs]
    text = "".join(f"{v.outer[0]} {v.inner} {v.outer[1]} {v.kind.value}\n" for v in vs)
    return _emit(args, data, text)


def cmd_induce(args) -> str:
    g = _graph(args)
    if args.margin is None and args.condition is None:
        raise UsageError("give --margin or --condition")
    margin, cond = set(_set(args.margin)), set(_set(args.condition))
    if margin & cond:
        raise UsageError("--margin and --condition overlap")
    if args.margin is None:
        margin = set(g.nodes) - cond
    elif args.condition is not None and margin | cond != set(g.nodes):
        raise UsageError("--margin and --condition must together cover every node")
    ind = induced_for_graph(g, margin)
    text = "".join(
        f"{name}\n{formats.text_grid(M)}"
        for name, M in (("aa_given_b", ind.aa_given_b), ("a_given_b", ind.a_given_b), ("bb_dot_a", ind.bb_dot_a))
    )
    return _emit(args, formats.induced_json(ind), text, formats.emit_dot(ind))


def cmd_query(args) -> str:
    g = _graph(args)
    if not args.query:
        raise UsageError("--query STR is required")
    q = formats.parse_query(args.query, sorted(g.nodes))
    answer = "independent" if separated(g, q) else "dependent"
    if args.out == "json":
        return formats.dumps({"query": str(q), "answer": answer})
    return answer + "\n"


def cmd_equiv(args) -> str:
    g1 = formats.parse_graph(_read(args.first))
    g2 = formats.parse_graph(_read(args.second))
    same = markov_equivalent(g1, g2)
    if args.out == "json":
        return formats.dumps({"markov_equivalent": same})
    return f"markov-equivalent: {'true' if same else 'false'}\n"


def cmd_gaussian_audit(args) -> str:
    g = _graph(args)
    margin = _set(args.margin)
    seeds = list(range(args.seed, args.seed + args.seeds))
    report = structural_zero_audit(g, margin, seeds, tol=args.tol)
    data = {
        "ok": report.ok,
        "seeds": report.seeds,
        "zero_violations": [list(x) for x in report.zero_violations],
        "unconfirmed_ones": [list(x) for x in report.unconfirmed_ones],
        "nonstructural_zeros": [list(x) for x in report.nonstructural_zeros],
    }
    text = f"{'ok' if report.ok else 'FAILED'}: {len(report.zero_violations)} zero violations, " \
           f"{len(report.unconfirmed_ones)} unconfirmed ones\n"
    return _emit(args, data, text)


def cmd_binary_table(args) -> str:
    g = _graph(args)
    if g.edges_of(EdgeKind.FULL):
        raise UnsupportedStructure("binary tables need a graph without full lines")
    rng = np.random.default_rng(args.seed)
    eta, omega = {}, {}
    # draw coefficients small enough that every conditional stays positive
    for node in g.response_nodes:
        parents = g.parents(node)
        if parents:
            vals = rng.uniform(0.2, 1.0, len(parents)) * rng.choice([-1, 1], len(parents))
            vals *= 0.45 / np.abs(vals).sum()
            for p, v in zip(parents, vals):
                eta[(node, p)] = float(v)
    for e in g.edges_of(EdgeKind.DASHED):
        omega[(e.i, e.j)] = float(rng.uniform(0.05, 0.2) * rng.choice([-1, 1]))
    table = build_table(SymBinaryModel(g, eta, omega))
    if args.out == "text":
        return table.to_csv()
    return table.to_json() + "\n"


def _matrix(args):
    if not args.matrix:
        raise UsageError("--matrix FILE is required")
    return formats.parse_matrix(_read(args.matrix))


def cmd_closure(args) -> str:
    arr, order = _matrix(args)
    M = partial_closure(EdgeMatrix(indicator(arr).entries, order), _set(args.margin))
    return _emit(args, formats.matrix_json(M), formats.text_grid(M))


def cmd_invert(args) -> str:
    arr, order = _matrix(args)
    out = partial_inversion(arr, _set(args.margin), order)
    data = {"order": list(order), "matrix": out.tolist()}
    text = "\n".join(" ".join(f"{x: .6g}" for x in row) for row in out) + "\n"
    return _emit(args, data, text)


COMMANDS = {
    "validate": cmd_validate,
    "vs": cmd_vs,
    "induce": cmd_induce,
    "query": cmd_query,
    "equiv": cmd_equiv,
    "gaussian-audit": cmd_gaussian_audit,
    "binary-table": cmd_binary_table,
    "closure": cmd_closure,
    "invert": cmd_invert,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--graph", metavar="FILE")
    common.add_argument("--margin", metavar="LIST", help="comma-separated node set a")
    common.add_argument("--condition", metavar="LIST", help="comma-separated node set b")
    common.add_argument("--query", metavar="STR")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=ZERO_TOL)
    common.add_argument("--out", choices=("dot", "json", "text"), default="json")

    parser = _Parser(prog="mixedgraphs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "equiv":
            p.add_argument("first")
            p.add_argument("second")
        if name in ("closure", "invert"):
            p.add_argument("--matrix", metavar="FILE")
        if name == "gaussian-audit":
            p.add_argument("--seeds", type=int, default=5)
    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        out = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 1
    except (MixedGraphError, ArithmeticError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    stdout.write(out)
    return 0


def main() -> None:
    sys.exit(run())
