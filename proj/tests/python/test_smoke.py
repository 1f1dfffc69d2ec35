import json
import math

import pytest

import kmsgraph

GOLDEN = {
    "kind": "explicit",
    "vertices": ["v0", "v1"],
    "base_vertex": "v0",
    "arrows": [
        {"src": "v0", "dst": "v1", "F": 1},
        {"src": "v1", "dst": "v0", "F": 1},
        {"src": "v1", "dst": "v1", "F": 1},
    ],
}
PHI = (1 + math.sqrt(5)) / 2


def test_graph_roundtrip():
    g = kmsgraph.parse(GOLDEN)
    assert g.size == 2 and len(g) == 2
    assert g.names == ["v0", "v1"]
    assert g.base == "v0"
    assert ("v1", "v1", 1.0, 1.0) in g.arrows()
    back = kmsgraph.parse(g.to_json())
    assert back.arrows() == g.arrows()


def test_green_at_ln2():
    g = kmsgraph.parse(GOLDEN)
    r = kmsgraph.green_function(g, math.log(2))
    assert r["status"] == "converged"
    assert r["value"] == pytest.approx(2.0, rel=1e-12)
    assert kmsgraph.green_function(g, math.log(2), "v1", "v1")["value"] == pytest.approx(4.0, rel=1e-12)


def test_entropy_and_recurrence():
    g = kmsgraph.parse(GOLDEN)
    assert kmsgraph.entropy(g)["estimate"] == pytest.approx(math.log(PHI), rel=1e-10)
    assert kmsgraph.classify(g, 1.0)["verdict"] == "transient"
    f = kmsgraph.first_return(g, math.log(PHI))
    assert f["value"] == pytest.approx(1.0, abs=1e-9)


def test_harmonic_vector():
    g = kmsgraph.parse(GOLDEN)
    r = kmsgraph.verify_harmonic(g, math.log(PHI), {"v0": 1.0, "v1": PHI})
    assert r["max_residual"] < 1e-12


def test_pascal_martin_kernel():
    g = kmsgraph.family("pascal", depth=8)
    k = kmsgraph.martin_kernel(g, 1.0, "(2,1)", "(3,2)")
    assert k["value"] == pytest.approx(2 / 3 * math.e, rel=1e-10)


def test_errors_are_typed():
    g = kmsgraph.parse(GOLDEN)
    with pytest.raises(kmsgraph.KmsGraphError, match="precondition"):
        kmsgraph.green_function(g, 1.0, "nowhere")
    with pytest.raises(kmsgraph.KmsGraphError, match="schema"):
        kmsgraph.family("no-such-family")


def test_cli_and_selftest():
    assert "green" in kmsgraph.verbs()
    code, out, err = kmsgraph.run_cli(["entropy", "--family", "golden"])
    assert code == 0, err
    assert json.loads(out)["status"] == "exact"
    assert kmsgraph.run_cli(["nonsense"])[0] == 2
    assert kmsgraph.selftest([4]) == [(4, True)]
