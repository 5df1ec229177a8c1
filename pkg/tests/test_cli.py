import json

import numpy as np
import pytest

from helpers import cross_polytope, regular_polygon, regular_simplex
from john_forge import jsonio
from john_forge.cli import InputError, PipelineConfig, main


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(path)
    return _write


def run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def vbody(V):
    return {"type": "vpolytope", "vertices": np.asarray(V).tolist()}


SQUARE = [[1, 1], [1, -1], [-1, 1], [-1, -1]]


def test_mvee_square(capsys, write):
    code, out, _ = run(capsys, ["mvee", "--points", write("sq.json", SQUARE)])
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "john-forge/1" and doc["command"] == "mvee"
    assert np.allclose(doc["Q"], np.eye(2) / 2, atol=1e-6)
    assert np.allclose(doc["center"], 0, atol=1e-6)


def test_mvee_simplex(capsys, write):
    code, out, _ = run(capsys, ["mvee", "--points", write("s.json", regular_simplex(3).tolist())])
    assert code == 0
    assert np.allclose(json.loads(out)["Q"], np.eye(3), atol=1e-6)


def test_mvee_collinear_exit_2(capsys, write):
    code, out, err = run(capsys, ["mvee", "--points", write("c.json", [[0, 0], [1, 1], [2, 2]])])
    assert code == 2 and out == "" and "error" in err


def test_decompose_square(capsys, write):
    code, out, _ = run(capsys, ["decompose", "--body", write("b.json", vbody(SQUARE))])
    assert code == 0
    doc = json.loads(out)
    meas = doc["measure"]
    assert np.allclose(meas["weights"], meas["weights"][0])
    assert meas["lambda"] == pytest.approx(sum(meas["weights"]) / 2)
    assert doc["verification"]["pass"] is True
    assert "artifacts" not in doc


def test_decompose_pentagon_verbose(capsys, write):
    code, out, _ = run(capsys, ["decompose", "--verbose", "--F", "paperconv",
                                "--body", write("p.json", vbody(regular_polygon(5)))])
    assert code == 0
    doc = json.loads(out)
    assert doc["measure"]["residual_iso"] <= 1e-8 and doc["measure"]["residual_center"] <= 1e-8
    assert set(doc["artifacts"]) == {"position", "contacts", "solvability", "minimize"}
    assert doc["artifacts"]["solvability"]["status"] == "Interior"


def test_decompose_hemisphere_exit_3(capsys, write):
    pts = write("h.json", {"points": [[1, 0], [-1, 0], [0, 1]]})
    code, out, err = run(capsys, ["decompose", "--points", pts])
    assert code == 3
    assert json.loads(out)["status"] == "Outside"
    assert "witness" in err


def test_check_subcommand(capsys, write):
    code, out, _ = run(capsys, ["check", "--points", write("p.json", regular_polygon(5).tolist())])
    assert code == 0 and json.loads(out)["status"] == "Interior"


def test_position_and_contacts(capsys, write):
    body = write("b.json", vbody(SQUARE))
    code, out, _ = run(capsys, ["position", "--body", body])
    assert code == 0
    assert np.allclose(json.loads(out)["A"], np.eye(2) / np.sqrt(2), atol=1e-6)
    code, out, _ = run(capsys, ["contacts", "--body", body])
    pts = np.array(json.loads(out)["points"])
    assert pts.shape == (4, 2)
    assert np.allclose(np.abs(pts), 1 / np.sqrt(2), atol=1e-6)


def test_verify_subcommand(capsys, write):
    good = {"points": cross_polytope(2).tolist(), "weights": [1, 1, 1, 1]}
    code, out, _ = run(capsys, ["verify", "--points", write("g.json", good)])
    assert code == 0 and json.loads(out)["pass"] is True
    bad = {"points": cross_polytope(2).tolist(), "weights": [1.1, 1, 1, 1]}
    code, out, _ = run(capsys, ["verify", "--points", write("b.json", bad)])
    assert code == 5 and json.loads(out)["pass"] is False


def test_flow_ball(capsys, write):
    code, out, _ = run(capsys, ["flow", "--rs", "0.9,0.99", "--body", write("b.json", {"type": "ball"})])
    assert code == 0
    lines = [json.loads(s) for s in out.splitlines()]
    assert [d["command"] for d in lines] == ["flow", "flow", "flow-summary"]
    for d in lines[:2]:
        assert np.allclose(d["A"], np.eye(2), atol=1e-8)
        assert np.allclose(d["v"], 0, atol=1e-8)
    assert len(lines[2]["derivative_check"]) == 2


def test_flow_budget_exit_6(capsys, write):
    code, _, err = run(capsys, ["flow", "--quad-budget", "100", "--rs", "0.9",
                                "--body", write("d.json", vbody(cross_polytope(2)))])
    assert code == 6 and "budget" in err


def test_flow_rejects_n4(capsys, write):
    code, _, _ = run(capsys, ["flow", "--body", write("s.json", vbody(regular_simplex(4)))])
    assert code == 1


@pytest.mark.parametrize("argv_tail,content", [
    (["decompose", "--body"], "{not json"),
    (["decompose", "--body"], json.dumps({"type": "dodecahedron"})),
    (["mvee", "--points"], json.dumps({"points": "abc"})),
])
def test_malformed_input_exit_1(capsys, write, argv_tail, content):
    code, out, err = run(capsys, argv_tail + [write("x.json", content)])
    assert code == 1 and out == "" and err


def test_argument_errors_exit_1(capsys, write):
    for argv in (["frobnicate"], ["mvee"], ["decompose"], ["decompose", "--F", "cubic", "--points", "x"]):
        with pytest.raises(SystemExit) as exc:
            code = main(argv)
            raise SystemExit(code)
        assert exc.value.code == 1
    capsys.readouterr()
    code, _, _ = run(capsys, ["mvee", "--eps", "-1", "--points", write("s.json", SQUARE)])
    assert code == 1


def test_config_validation():
    with pytest.raises(InputError):
        PipelineConfig(F="cubic")
    with pytest.raises(InputError):
        PipelineConfig(tol=0.0)
    with pytest.raises(InputError):
        PipelineConfig(quad_budget=0)


def test_out_file_and_determinism(capsys, write, tmp_path):
    body = write("p.json", vbody(regular_polygon(5)))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["decompose", "--body", body, "--out", str(a)]) == 0
    assert main(["decompose", "--body", body, "--out", str(b)]) == 0
    assert capsys.readouterr().out == ""
    assert a.read_bytes() == b.read_bytes()
    assert jsonio.load(str(a))["schema"] == "john-forge/1"


def test_float_format():
    text = jsonio.dumps({"x": 0.1, "y": 1.0, "z": -0.0, "n": float("nan"), "k": 3})
    assert text == '{"x": 0.10000000000000001, "y": 1.0, "z": 0.0, "n": null, "k": 3}'
