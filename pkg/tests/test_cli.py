import io
import json
import subprocess
import sys

import numpy as np
import pytest

from qsparanormal.cli import dumps, run
from qsparanormal.gallery import step_down_weights
from qsparanormal.linalg import matrix_to_json


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
        return str(p)

    return _write


@pytest.fixture
def diag(write):
    return write("diag.json", matrix_to_json(np.diag([1.0, 2.0, 3.0j])))


@pytest.fixture
def jordan_path(write):
    return write("jordan.json", matrix_to_json(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_check_diagonal_member(diag):
    code, out, _ = _run("check", "--class", "qsp", "--n", "1", "--k", "1", "--matrix", diag)
    assert code == 0 and "Member" in out


def test_check_jordan_refuted(jordan_path):
    code, out, _ = _run("check", "--class", "qsp", "--n", "0", "--k", "0", "--matrix", jordan_path, "--json")
    assert code == 1
    assert json.loads(out)["status"] == "NonMember"


@pytest.mark.parametrize("family, extra", [("qp", ["--n", "1", "--k", "0"]), ("qsa", ["--k", "1"]), ("qh", ["--k", "1"]), ("normaloid", [])])
def test_check_other_families(diag, family, extra):
    code, _, _ = _run("check", "--class", family, *extra, "--matrix", diag)
    assert code == 0


def test_gallery_block_example():
    code, out, _ = _run("gallery", "ex-3.4", "--json")
    assert code == 1
    entry = json.loads(out)["entries"][0]
    statuses = [e["observed"]["status"] for e in entry["expectations"] if isinstance(e["observed"], dict) and "status" in e["observed"]]
    assert "NonMember" in statuses
    assert all(e["passed"] for e in entry["expectations"])


def test_shift_check_step_down(write):
    w = write("w.json", step_down_weights(1).to_json())
    code, out, _ = _run("shift-check", "--weights", w, "--n", "1", "--k", "1")
    assert code == 1 and "first violation at m=1" in out
    code, _, _ = _run("shift-check", "--weights", w, "--n", "1", "--k", "2")
    assert code == 0
    code, out, _ = _run("shift-check", "--weights", w, "--class", "normaloid", "--json")
    assert code == 1 and json.loads(out)["norm"] == "2"


def test_classify_and_sweep_bounds(diag):
    code, out, _ = _run("classify", "--matrix", diag, "--n", "1", "--k", "1", "--json")
    assert code == 0
    classes = {v["class"] for v in json.loads(out)["verdicts"]}
    assert {"qsp(0,0)", "qsp(1,1)", "qp(1,1)", "qsa(1)", "normaloid"} <= classes
    assert "qsp(2,0)" not in classes


def test_decompose_and_spectral(jordan_path):
    code, out, _ = _run("decompose", "--matrix", jordan_path, "--k", "1", "--json")
    assert code == 0 and json.loads(out)["range_dim"] == 1
    code, out, _ = _run("spectral", "--matrix", jordan_path, "--json")
    assert code == 1
    assert json.loads(out)["violations"][0]["check"] == "kernel-stabilization"
    code, _, _ = _run("spectral", "--matrix", jordan_path, "--k", "1")
    assert code == 0


def test_similar(write):
    obj = {
        "A": matrix_to_json(2 * np.eye(2)),
        "B": matrix_to_json(np.eye(2)),
        "C": matrix_to_json(np.array([[0.0, 1.0], [0.0, 0.0]])),
    }
    code, out, _ = _run("similar", "--matrix", write("s.json", obj), "--k", "2", "--json")
    assert code == 0
    assert json.loads(out)["intertwining_residual"] <= 1e-10
    obj["A"] = matrix_to_json(np.zeros((2, 2)))
    code, _, err = _run("similar", "--matrix", write("s0.json", obj), "--k", "2")
    assert code == 65 and "NotInvertible" in err
    obj["A"] = {"rows": 2, "cols": 2, "data": [[1, 0], [0, 0], [0, 0]]}
    code, _, err = _run("similar", "--matrix", write("s1.json", obj), "--k", "2")
    assert code == 65 and "A.data" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--class", "qsp", "--n", "1", "--matrix", "m.json"],
        ["check", "--class", "qsp", "--n", "1", "--k", "1", "--matrix", "m.json", "--bogus"],
        ["check", "--class", "qsa", "--n", "1", "--k", "1", "--matrix", "m.json"],
        ["check", "--class", "nope", "--matrix", "m.json"],
        ["gallery", "ex-0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(argv):
    code, _, err = _run(*argv)
    assert code == 64 and "usage error" in err


def test_data_errors(write, tmp_path):
    bad = write("bad.json", {"rows": 2, "cols": 2, "data": [[1, 0], [0, 0], ["x", 0], [1, 0]]})
    code, _, err = _run("check", "--class", "normaloid", "--matrix", bad)
    assert code == 65 and "bad.json" in err and "data[2]" in err
    code, _, err = _run("check", "--class", "normaloid", "--matrix", write("t.json", "{oops"))
    assert code == 65 and "t.json" in err
    code, _, err = _run("check", "--class", "normaloid", "--matrix", str(tmp_path / "missing.json"))
    assert code == 65
    rect = write("rect.json", matrix_to_json(np.ones((2, 3))))
    code, _, err = _run("check", "--class", "normaloid", "--matrix", rect)
    assert code == 65 and "square" in err
    w = write("w.json", {"prefix": [], "tail": ["0"]})
    code, _, err = _run("shift-check", "--weights", w, "--n", "1", "--k", "1")
    assert code == 65 and "tail[0]" in err


def test_json_round_trip(jordan_path):
    for argv in (
        ["check", "--class", "qsp", "--n", "1", "--k", "0", "--matrix", jordan_path, "--json"],
        ["spectral", "--matrix", jordan_path, "--json"],
        ["gallery", "ex-2.3.3", "--json"],
    ):
        _, out, _ = _run(*argv)
        assert dumps(json.loads(out)) + "\n" == out


def test_deterministic_with_seed(write):
    rng = np.random.default_rng(1)
    M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    p = write("g.json", matrix_to_json(M))
    argv = ["classify", "--matrix", p, "--seed", "5", "--restarts", "8", "--json"]
    assert _run(*argv) == _run(*argv)


def test_console_entry_point(diag):
    proc = subprocess.run(
        [sys.executable, "-m", "qsparanormal.cli", "check", "--class", "normaloid", "--matrix", diag],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and "Member" in proc.stdout
