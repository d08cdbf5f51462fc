from __future__ import annotations

import io
import json

import pytest

from mixedgraphs.cli import run
from mixedgraphs.formats import emit_graph
from mixedgraphs.graph import RegressionGraph


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path, sink_graph, sur_graph):
    def write(name, g):
        p = tmp_path / name
        p.write_text(emit_graph(g))
        return str(p)

    chain = [(1, 2), (2, 3), (3, 4)]
    return {
        "sink": write("sink.rg", sink_graph),
        "sur": write("sur.rg", sur_graph),
        "chain-dag": write("chain-dag.rg", RegressionGraph.parent(4, chain)),
        "chain-con": write("chain-con.rg", RegressionGraph.concentration(4, chain)),
        "cov-chain": write("cov-chain.rg", RegressionGraph.covariance(4, chain)),
        "dir": str(tmp_path),
    }


def test_query(files):
    assert call("query", "--graph", files["sink"], "--query", "2 _||_ 3 | 4", "--out", "text") == (0, "independent\n", "")
    code, out, _ = call("query", "--graph", files["sink"], "--query", "2 _||_ 3 | 1", "--out", "text")
    assert out == "dependent\n"
    code, out, _ = call("query", "--graph", files["sink"], "--query", "2 _||_ 3 | 4")
    assert json.loads(out) == {"answer": "independent", "query": "2 _||_ 3 | 4"}


def test_induce_dot(files):
    code, out, _ = call("induce", "--graph", files["sink"], "--margin", "", "--out", "dot")
    assert code == 0
    assert "  2 -> 3 [dir=none];" in out
    assert out.count("[dir=none]") == 5


def test_induce_json_and_condition(files):
    code, out, _ = call("induce", "--graph", files["sink"], "--condition", "2,3,4,5")
    data = json.loads(out)
    assert data["a"] == [1] and data["b"] == [2, 3, 4, 5]
    assert data["bb_dot_a"]["matrix"][0] == [1, 0, 0, 0]
    code, _, err = call("induce", "--graph", files["sink"], "--margin", "1", "--condition", "1,2,3,4,5")
    assert code == 1 and "overlap" in err


def test_equiv(files):
    assert call("equiv", files["chain-dag"], files["chain-con"], "--out", "text")[1] == "markov-equivalent: true\n"
    assert call("equiv", files["cov-chain"], files["sur"], "--out", "text")[1] == "markov-equivalent: true\n"
    assert call("equiv", files["sink"], files["chain-dag"], "--out", "text")[1] == "markov-equivalent: false\n"


def test_validate_and_vs(files, tmp_path):
    assert call("validate", "--graph", files["sink"], "--out", "text") == (0, "valid\n", "")
    bad = tmp_path / "bad.rg"
    bad.write_text("nodes: 2\narrow 2 < 1\n")
    code, _, err = call("validate", "--graph", str(bad))
    assert code == 2 and "line 2" in err
    code, out, _ = call("vs", "--graph", files["sink"], "--out", "text")
    assert "2 1 3 sink" in out.splitlines()


def test_gaussian_audit(files):
    code, out, _ = call("gaussian-audit", "--graph", files["sink"], "--margin", "4", "--seed", "3")
    data = json.loads(out)
    assert code == 0 and data["ok"] and data["seeds"] == [3, 4, 5, 6, 7]


def test_binary_table_is_reproducible(files):
    first = call("binary-table", "--graph", files["sur"], "--seed", "7", "--out", "text")
    second = call("binary-table", "--graph", files["sur"], "--seed", "7", "--out", "text")
    assert first == second and first[0] == 0
    rows = first[1].splitlines()
    assert rows[0] == "x1,x2,x3,x4,p" and len(rows) == 17
    assert abs(sum(float(r.split(",")[-1]) for r in rows[1:]) - 1) < 1e-12


def test_binary_table_rejects_full_lines(files):
    code, _, err = call("binary-table", "--graph", files["chain-con"])
    assert code == 2 and "full lines" in err


def test_matrix_commands(tmp_path):
    m = tmp_path / "m.txt"
    m.write_text("2 1\n1 2\n")
    code, out, _ = call("invert", "--matrix", str(m), "--margin", "1")
    assert code == 0 and json.loads(out)["matrix"] == [[0.5, -0.5], [0.5, 1.5]]
    code, _, err = call("invert", "--matrix", str(m), "--margin", "1,2", "--out", "dot")
    assert code == 1
    e = tmp_path / "e.txt"
    e.write_text("1 1 0\n0 1 1\n0 0 1\n")
    code, out, _ = call("closure", "--matrix", str(e), "--margin", "2")
    assert json.loads(out)["matrix"][0] == [1, 1, 1]
    z = tmp_path / "z.txt"
    z.write_text("0 1\n1 0\n")
    assert call("invert", "--matrix", str(z), "--margin", "1")[0] == 2


def test_usage_errors(files):
    assert call()[0] == 1
    assert call("frob")[0] == 1
    assert call("query", "--graph", files["sink"])[0] == 1
    assert call("query", "--graph", files["dir"] + "/missing.rg", "--query", "1 _||_ 2")[0] == 1
    assert call("query", "--graph", files["sink"], "--query", "1 _||_ 9")[0] == 2
    assert call("query", "--graph", files["sink"], "--query", "1", "--out", "xml")[0] == 1
