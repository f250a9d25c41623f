import json
import subprocess
import sys

import pytest

from fraisse.algebra import ba_natural_order, bridge_to_structure
from fraisse.classes import complete_graph, equivalence, graph
from fraisse.cli import run
from fraisse.structures import serialize_structure


@pytest.fixture
def files(tmp_path):
    def write(name, S):
        p = tmp_path / name
        p.write_text(serialize_structure(S))
        return str(p)
    out = {f"k{n}": write(f"k{n}.struct", complete_graph(n)) for n in (1, 2, 3, 5, 6)}
    out["p3"] = write("p3.struct", graph(3, [(0, 1), (1, 2)]))
    out["two_class"] = write("e2.struct", equivalence(2, [[0, 1]]))
    out["b1"] = write("b1.struct", bridge_to_structure("ba", 1, order=ba_natural_order(1)))
    out["b2"] = write("b2.struct", bridge_to_structure("ba", 2, order=ba_natural_order(2)))
    out["b2r"] = write("b2r.struct", bridge_to_structure("ba", 2, order=ba_natural_order(2, (1, 0))))
    out["dir"] = tmp_path
    return out


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_arrow_holds_and_fails(files, capsys):
    cert = files["dir"] / "cert.json"
    code, out, _ = call(capsys, "arrow", "--class", "graphs", "--A", files["k2"], "--B", files["k3"],
                        "--C", files["k6"], "-k", 2, "-t", 1, "--out", cert, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1 and doc["verdict"] == "holds"
    assert json.loads(cert.read_text()) == doc
    code, out, _ = call(capsys, "arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k5"],
                        "--format", "json", "--out", files["dir"] / "fails.json")
    assert code == 1
    assert json.loads(out)["verdict"] == "fails"


def test_every_certificate_reverifies(files, capsys):
    d = files["dir"]
    jobs = [
        ["arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k5"]],
        ["arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k6"]],
        ["witness", "--class", "graphs", "--A", files["k1"], "--B", files["k2"], "--max-size", 4],
        ["op-check", "--class", "convex_eq", "--A", files["two_class"], "--max-size", 4],
        ["check", "--class", "ogr", "--props", "hp,order_forgetful", "--bound", 3],
        ["limit", "--class", "graphs", "--size", 6, "--seed", 3],
        ["oba", "amalgamate", "--B", files["b1"], "--C", files["b2"], "--D", files["b2r"],
         "--f", d / "f.map", "--g", d / "g.map"],
    ]
    (d / "f.map").write_text("0 -> 0\n1 -> 3\n")
    (d / "g.map").write_text("# identity on constants\n0 -> 0\n1 -> 3\n")
    for i, job in enumerate(jobs):
        path = d / f"c{i}.json"
        code, _, err = call(capsys, *job, "--out", path)
        assert code in (0, 1), err
        code, out, _ = call(capsys, "verify", path, "--format", "json")
        assert code == 0, (job, out)
        assert json.loads(out)["valid"] is True


def test_tampered_certificate_fails_verification(files, capsys):
    path = files["dir"] / "t.json"
    call(capsys, "arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k5"], "--out", path)
    doc = json.loads(path.read_text())
    doc["coloring"] = [1] * len(doc["coloring"])
    path.write_text(json.dumps(doc))
    code, out, _ = call(capsys, "verify", path)
    assert code == 1 and "rejected" in out
    path.write_text("{}")
    assert call(capsys, "verify", path)[0] == 1
    path.write_text("not json")
    assert call(capsys, "verify", path)[0] == 2


def test_check_convex_eq(capsys):
    code, out, _ = call(capsys, "check", "--class", "convex_eq", "--props", "hp,ap,sap,reasonable",
                        "--bound", 4, "--format", "json")
    doc = json.loads(out)
    assert [r["property"] for r in doc["reports"]] == ["hp", "ap", "sap", "reasonable"]
    assert doc["reports"][0]["verdict"] == "verified"
    assert code == (0 if all(r["verdict"] == "verified" for r in doc["reports"]) else 1)


def test_degree_report(files, capsys):
    code, out, _ = call(capsys, "degree", "--class0", "graphs", "--classO", "ogr", "--A", files["p3"],
                        "--max-size", 7, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["upper"] == 3 and doc["lower"] == 3


def test_orderings_and_triangle(files, capsys):
    code, out, _ = call(capsys, "orderings", "--class", "ogr", "--A", files["p3"], "--format", "json")
    assert code == 0 and json.loads(out)["t_K"] == 3
    code, out, _ = call(capsys, "triangle", "--class", "convex_eq", "--max-size", 3, "--format", "json")
    assert code == 1 and len(json.loads(out)["unwitnessed"]) == 1


def test_enumerate_text_and_json(capsys):
    code, out, _ = call(capsys, "enumerate", "--class", "graphs", "--size", 3)
    assert code == 0 and out.count("structure") == 4
    code, out, _ = call(capsys, "enumerate", "--class", "eq", "--size", 4, "--format", "json")
    assert json.loads(out)["count"] == 5


def test_algebra_commands(files, capsys):
    code, out, _ = call(capsys, "oba", "natural", "--atoms", 2, "--atom-order", 1, 0, "--format", "json")
    assert json.loads(out)["order"] == [0, 2, 1, 3]
    code, out, _ = call(capsys, "oba", "recognize", "--A", files["b2r"], "--format", "json")
    assert code == 0 and json.loads(out)["natural"]
    code, out, _ = call(capsys, "ovf", "natural", "--q", 3, "--dim", 1, "--field-order", 0, 2, 1, "--format", "json")
    assert json.loads(out)["order"] == [0, 2, 1]
    path = files["dir"] / "v.struct"
    call(capsys, "ovf", "bridge", "--q", 2, "--dim", 2, "--out", path)
    code, out, _ = call(capsys, "ovf", "recognize", "--q", 2, "--A", path, "--format", "json")
    assert code == 0 and json.loads(out)["natural"]
    code, _, err = call(capsys, "oba", "recognize", "--A", files["k3"])
    assert code == 2
    assert call(capsys, "oba", "amalgamate", "--B", files["b1"])[0] == 2
    assert call(capsys, "ovf", "natural", "--q", 4)[0] == 2


def test_exit_codes(files, capsys):
    assert call(capsys, "bogus")[0] == 2
    assert call(capsys, "arrow", "--A", files["k3"], "--B", files["k2"], "--C", files["k6"])[0] == 2
    assert call(capsys, "arrow", "--A", "missing.struct", "--B", files["k3"], "--C", files["k6"])[0] == 2
    assert call(capsys, "arrow", "--class", "ogr", "--A", files["k2"], "--B", files["k3"],
                "--C", files["k6"])[0] == 2
    code, _, err = call(capsys, "arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k6"],
                        "--budget-nodes", 5)
    assert code == 3 and "budget" in err
    assert call(capsys, "check", "--class", "graphs", "--props", "nope")[0] == 2
    bad = files["dir"] / "bad.struct"
    bad.write_text("structure\nsize 2\nrel E arity 2\n0 5\nend\n")
    code, _, err = call(capsys, "enumerate", "--class", "nope", "--size", 2)
    assert code == 2
    code, _, err = call(capsys, "arrow", "--A", bad, "--B", files["k3"], "--C", files["k6"])
    assert code == 2 and "line 4" in err


def test_bad_embedding_file(files, capsys):
    d = files["dir"]
    (d / "f.map").write_text("0 => 0\n")
    (d / "g.map").write_text("0 -> 0\n1 -> 3\n")
    code, _, err = call(capsys, "oba", "amalgamate", "--B", files["b1"], "--C", files["b2"], "--D", files["b2"],
                        "--f", d / "f.map", "--g", d / "g.map")
    assert code == 2 and "i -> j" in err


def test_config_file_and_flag_precedence(files, capsys):
    cfg = files["dir"] / "cfg.json"
    cfg.write_text(json.dumps({"format": "json", "budget_nodes": 5}))
    args = ["arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k6"], "--config", cfg]
    assert call(capsys, *args)[0] == 3
    code, out, _ = call(capsys, *args, "--budget-nodes", 100000)
    assert code == 0 and json.loads(out)["verdict"] == "holds"
    code, out, _ = call(capsys, *args, "--budget-nodes", 100000, "--format", "text")
    assert out.startswith("command:")
    cfg.write_text("[1]")
    assert call(capsys, *args)[0] == 2


def test_outputs_are_byte_identical(files, capsys):
    args = ["limit", "--class", "graphs", "--size", 7, "--seed", 4, "--format", "json"]
    outs = {call(capsys, *args, "--threads", n)[1] for n in (1, 2, 4, 1)}
    assert len(outs) == 1
    args = ["arrow", "--A", files["k2"], "--B", files["k3"], "--C", files["k5"], "--format", "json"]
    assert len({call(capsys, *args)[1] for _ in range(3)}) == 1


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "fraisse", "orderings", "--class", "ogr", "--A", files["k2"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "t_K: 1" in proc.stdout
