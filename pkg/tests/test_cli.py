import json

import pytest

from layerscope.cli import main

TRI = "label,x\na,0\nb,1\nc,3\n"
WS = "label,x\ny0,0\ny1,0.5\ny2,10\ny3,10.5\ny4,20\ny5,20.5\n"


@pytest.fixture
def files(tmp_path):
    out = {}
    for name, text in {"tri.csv": TRI, "ws.csv": WS,
                       "tri_matrix.csv": ",a,b,c\na,0,1,3\nb,1,0,2\nc,3,2,0\n",
                       "bad.csv": ",a,b,c\na,0,1,5\nb,1,0,1\nc,5,1,0\n",
                       "sample.txt": "y0\ny2\ny4\n"}.items():
        p = tmp_path / name
        p.write_text(text)
        out[name] = str(p)
    return out


def run(capsys, *args):
    code = main(list(args))
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_cluster_dot_and_matrix_agree(files, capsys):
    code, dot, _ = run(capsys, "cluster", "--points", files["tri.csv"], "--metric", "euclidean",
                       "--kmax", "2", "--format", "dot")
    assert code == 0 and dot.startswith("digraph gamma {")
    _, a, _ = run(capsys, "cluster", "--points", files["tri.csv"])
    _, b, _ = run(capsys, "cluster", "--matrix", files["tri_matrix.csv"])
    assert a == b
    d = json.loads(a)
    assert d["schema"] == "layerscope.cluster/1"
    assert d["clustering"]["variance"] == [1, -1]


def test_bad_matrix_reports_witness(files, capsys):
    code, out, err = run(capsys, "cluster", "--matrix", files["bad.csv"])
    assert code == 2 and out == ""
    e = json.loads(err)
    assert e["error"] == "triangle" and e["witness"] == [0, 1, 2]


def test_layer_points_variants(files, capsys):
    _, out, _ = run(capsys, "layer-points", "--points", files["tri.csv"], "--degree", "0", "--global")
    assert len(json.loads(out)["points"]) == 5
    _, out, _ = run(capsys, "layer-points", "--points", files["tri.csv"], "--degree", "1", "--branch")
    d = json.loads(out)
    assert d["kind"] == "branch" and [p["members"] for p in d["points"]] == [[0, 1]]
    _, out, _ = run(capsys, "layer-points", "--points", files["tri.csv"], "--slice", "2")
    d = json.loads(out)
    assert d["selection"] == "slice-2"
    assert all("slice-layer-2" in p["kinds"] for p in d["points"])
    _, out, _ = run(capsys, "layer-points", "--points", files["tri.csv"], "--branch")
    assert json.loads(out)["kind"] == "branch"
    code, _, err = run(capsys, "layer-points", "--points", files["tri.csv"], "--slice", "3")
    assert code == 2 and json.loads(err)["error"] == "usage"


def test_retract_check_outcomes(files, capsys):
    code, out, _ = run(capsys, "retract-check", "--points", files["ws.csv"], "--subsample", "0,2,4")
    d = json.loads(out)
    assert code == 0 and d["outcome"] == "retract-verified"
    assert d["inputs"]["eps"] == "0.5" and d["inputs"]["c"] == "0" and d["inputs"]["delta"] == "1"
    code, _, _ = run(capsys, "retract-check", "--points", files["tri.csv"], "--subsample", "0,2")
    assert code == 1
    code, _, _ = run(capsys, "retract-check", "--points", files["ws.csv"],
                     "--subsample-file", files["sample.txt"], "--corollary", "smallparam")
    assert code == 0
    code, out, _ = run(capsys, "retract-check", "--points", files["tri.csv"],
                       "--corollary", "truncation", "--c", "0.5")
    assert code == 0 and json.loads(out)["check"] == "truncation"
    code, out, _ = run(capsys, "retract-check", "--points", files["tri.csv"],
                       "--corollary", "xy-note", "--k", "1")
    assert code == 0 and not json.loads(out)["conditions"]["gap_satisfiable"]


@pytest.mark.parametrize("sub", ["0,x", "1,1", "0,9", ""])
def test_malformed_subsample(files, capsys, sub):
    code, _, err = run(capsys, "retract-check", "--points", files["tri.csv"], "--subsample", sub)
    assert code == 2 and json.loads(err)["schema"] == "layerscope.error/1"


@pytest.mark.parametrize("args", [
    ["retract-check", "--eps", "abc"],
    ["retract-check", "--subsample", "0", "--farthest", "2"],
    ["retract-check", "--format", "dot"],
    ["cluster", "--kmax", "9"],
])
def test_usage_errors(files, capsys, args):
    code, _, err = run(capsys, args[0], "--points", files["tri.csv"], *args[1:])
    assert code == 2 and "error" in json.loads(err)


def test_input_errors(files, capsys, tmp_path):
    code, _, err = run(capsys, "cluster", "--matrix", files["tri_matrix.csv"], "--metric", "euclidean")
    assert code == 2
    code, _, err = run(capsys, "cluster", "--points", str(tmp_path / "missing.csv"))
    assert code == 2 and json.loads(err)["error"] == "FileNotFoundError"
    assert main(["cluster"]) == 2
    capsys.readouterr()


def test_farthest_and_output_file(files, capsys, tmp_path):
    target = tmp_path / "r.json"
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "retract-check", "--points", files["ws.csv"], "--farthest", "3",
                           "--seed", "3", "--output", str(target))
        assert out == "" and code in (0, 1)
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    assert len(json.loads(outs[0])["inputs"]["X"]) == 3
