import csv
import io
import json

import pytest

from arborp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classgroup(capsys):
    code, out, _ = run(capsys, "classgroup", "-d", "-47")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "arbor-p/1" and doc["h"] == 5
    assert doc["config"]["command"] == "classgroup"
    code, out, _ = run(capsys, "classgroup", "-d", "-47", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out.split("\n", 1)[1])))
    assert rows[0] == ["A", "B", "C", "order"] and len(rows) == 6


def test_pic(capsys):
    code, out, _ = run(capsys, "pic", "-d", "-47", "-p", "2")
    doc = json.loads(out)
    assert (doc["k"], doc["h_prime"]) == (5, 1)
    code, out, err = run(capsys, "pic", "-d", "-4", "-p", "2")
    assert code == 2 and "split or inert" in err and out == ""


def test_volcano_dot(capsys):
    code, out, _ = run(capsys, "volcano", "-d", "-47", "-p", "2", "--depth", "1", "--dot")
    assert code == 0 and "graph volcano_d47_p2" in out
    assert out.count("depth=0") == 5 and out.count("depth=1") == 5
    code, out2, _ = run(capsys, "volcano", "-d", "-47", "-p", "2", "--depth", "1",
                        "--from-tree", "--format", "json")
    doc = json.loads(out2)
    assert len(doc["nodes"]) == 10


def test_iscycles(capsys):
    code, out, _ = run(capsys, "iscycles", "-d", "-119", "-p", "2")
    doc = json.loads(out)
    assert doc["count"] == 2 and all(c["length"] == 5 for c in doc["cycles"])


def test_duke_small_range(capsys):
    code, out, _ = run(capsys, "duke", "--dmin", "-2000", "--dmax", "-1000", "-p", "2",
                       "--Y", "2", "--box=-0.5,0,1,inf")
    doc = json.loads(out)
    assert code == 0
    assert doc["summary"][0]["predicted"] == pytest.approx(0.477464829, abs=1e-8)
    assert len(doc["summary"]) == 2


def test_quotient(capsys):
    code, out, _ = run(capsys, "quotient", "-q", "11", "-p", "3")
    doc = json.loads(out)
    assert sorted(v["mass"] for v in doc["vertices"]) == ["1/4", "1/6"]
    assert doc["total_mass"] == doc["eichler_mass"] == "5/12"
    code, out, _ = run(capsys, "quotient", "-q", "11", "-p", "3", "--format", "dot")
    assert out.count("--") == 3


def test_heegner(capsys):
    code, out, _ = run(capsys, "heegner", "-d", "-91", "-q", "2", "-p", "3")
    doc = json.loads(out)
    assert doc["count"] == 2
    tau = doc["points"][0]["tau"]
    assert tau["x"]["precision"] == len(tau["x"]["digits"])


def test_equidist(capsys):
    code, out, _ = run(capsys, "equidist", "-q", "11", "-p", "3", "--dmax", "-3000")
    doc = json.loads(out)
    assert code == 0 and doc["predicted"] == [0.6, 0.4]
    assert [b["abs_d_range"] for b in doc["buckets"]] == [[3, 10], [11, 100], [101, 1000],
                                                          [1001, 3000]]


@pytest.mark.parametrize("argv,code", [
    (["classgroup", "-d", "-5"], 2),
    (["pic", "-d", "-47", "-p", "4"], 2),
    (["quotient", "-q", "3", "-p", "3"], 2),
    (["heegner", "-d", "-3", "-q", "2", "-p", "3"], 2),
    (["volcano", "-d", "-28", "-p", "2"], 2),
    (["iscycles", "-d", "-47", "-p", "2", "--format", "dot"], 2),
    (["classgroup", "-d", "-47", "--tolerance", "2"], 2),
])
def test_exit_codes(capsys, argv, code):
    assert main(argv) == code
    assert "error" in capsys.readouterr().err


def test_bound_exhaustion_exit_code(capsys, monkeypatch):
    from arborp import cli
    from arborp.errors import EnumerationBoundExceeded

    def boom(args, cfg):
        raise EnumerationBoundExceeded("witness norm exceeds bound", 81)

    monkeypatch.setattr(cli, "cmd_quotient", boom)
    assert main(["quotient", "-q", "11", "-p", "3"]) == 3
    assert "bound" in capsys.readouterr().err


def test_output_file(tmp_path, capsys):
    target = tmp_path / "out.json"
    assert main(["classgroup", "-d", "-23", "-o", str(target)]) == 0
    assert json.loads(target.read_text())["h"] == 3
