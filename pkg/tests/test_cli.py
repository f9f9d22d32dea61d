import json
import shutil
import subprocess

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qgres.cli import main
from qgres.fixtures import double_edge_two_leads


@pytest.fixture
def double_edge_files(tmp_path):
    gpath = tmp_path / "g.json"
    ppath = tmp_path / "p.json"
    gpath.write_text(json.dumps(double_edge_two_leads().to_json_dict()))
    ppath.write_text(json.dumps({"mode": "length", "entries": {"e1": [1, -1]}}))
    return str(gpath), str(ppath)


def _rows(path):
    lines = path.read_text().strip().split("\n")
    return lines[0].split(","), [r.split(",") for r in lines[1:]]


def test_eigs_fixture_to_stdout(capsys):
    assert main(["eigs", "--fixture", "five-edge", "--window", "1,7,-0.5,0"]) == 0
    out = capsys.readouterr().out.strip().split("\n")
    assert out[0] == "lambda,multiplicity"
    vals = {float(r.split(",")[0]): int(r.split(",")[1]) for r in out[1:]}
    lams = sorted(vals)
    assert_allclose(lams, [2 * np.arctan(np.sqrt(2)), np.pi,
                           4.372552070930568, 2 * np.pi], atol=1e-8)
    assert vals[lams[-1]] == 2


def test_eigs_empty_for_half_line(capsys):
    assert main(["eigs", "--fixture", "halfline"]) == 0
    assert capsys.readouterr().out.strip() == "lambda,multiplicity"


def test_resonances_from_graph_file(double_edge_files, tmp_path, capsys):
    gpath, _ = double_edge_files
    out = tmp_path / "res"
    code = main(["resonances", "--graph", gpath, "--window", "2,7,-2,0",
                 "--out", str(out)])
    assert code == 0
    assert capsys.readouterr().out == ""
    header, rows = _rows(out / "resonances.csv")
    assert header == ["re_lambda", "im_lambda", "multiplicity"]
    assert len(rows) == 4
    # no stray temp files from the atomic rename
    assert [p.name for p in out.iterdir()] == ["resonances.csv"]


def test_fgr_report_file(double_edge_files, tmp_path):
    gpath, ppath = double_edge_files
    out = tmp_path / "f"
    code = main(["fgr", "--graph", gpath, "--perturbation", ppath,
                 "--window", "3,3.3,-0.5,0", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "fgr.json").read_text())
    assert doc["lambda"] == pytest.approx(np.pi, abs=1e-10)
    assert doc["lambda_dot"] == pytest.approx(np.pi / 2, abs=1e-9)
    assert doc["im_lambda_ddot"] == pytest.approx(-np.pi ** 2 / 8, abs=1e-8)
    assert all(len(z) == 2 for z in doc["coefficients"])


def test_track_csv(double_edge_files, tmp_path):
    gpath, ppath = double_edge_files
    out = tmp_path / "t"
    code = main(["track", "--graph", gpath, "--perturbation", ppath,
                 "--window", "3,3.3,-0.5,0", "--tmax", "0.04", "--steps", "4",
                 "--out", str(out)])
    assert code == 0
    header, rows = _rows(out / "trajectory.csv")
    assert header == ["t", "re_lambda", "im_lambda", "re_model", "im_model",
                      "residual"]
    assert len(rows) == 9
    ts = [float(r[0]) for r in rows]
    assert ts == sorted(ts) and ts[0] == -0.04 and ts[-1] == 0.04


def test_quasimode_report(double_edge_files, tmp_path):
    gpath, ppath = double_edge_files
    out = tmp_path / "q"
    code = main(["quasimode", "--graph", gpath, "--perturbation", ppath,
                 "--window", "3,3.3,-0.5,0", "--tmax", "0.005", "--steps", "4",
                 "--out", str(out)])
    assert code == 0
    docs = json.loads((out / "quasimode.json").read_text())
    assert len(docs) == 4
    for d in docs:
        assert set(d) == {"lambda0", "t", "epsilon", "gamma", "distance",
                          "holds", "C_observed"}
        assert d["holds"] is True
        assert d["C_observed"] == pytest.approx(d["epsilon"] / d["t"])


@pytest.mark.parametrize("argv", [
    ["eigs", "--fixture", "unknown-graph"],
    ["eigs", "--fixture", "cycle:x"],
    ["fgr", "--fixture", "double-edge"],                       # missing perturbation
    ["eigs", "--fixture", "double-edge", "--window", "1,2,3"],
    ["eigs", "--fixture", "double-edge", "--window", "2,1,-1,0"],
    ["eigs", "--fixture", "double-edge", "--window=-1,1,-1,0"],  # contains 0
    ["track", "--fixture", "double-edge", "--steps", "2"],
    ["eigs", "--fixture", "double-edge", "--tol", "-1"],
    ["quasimode", "--fixture", "double-edge", "--gamma", "1.5"],
    ["eigs"],
])
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_solver_errors_exit_3(double_edge_files, capsys):
    _, ppath = double_edge_files
    # degenerate eigenvalue of the compact 2-cycle cannot seed a report
    code = main(["fgr", "--fixture", "cycle:2", "--perturbation", ppath,
                 "--window", "3,3.3,-0.5,0"])
    assert code == 3
    assert "solver failure" in capsys.readouterr().err


def test_missing_graph_file_exit_2(tmp_path, capsys):
    assert main(["eigs", "--graph", str(tmp_path / "absent.json")]) == 2
    capsys.readouterr()


def test_byte_identical_reruns(double_edge_files, tmp_path):
    gpath, ppath = double_edge_files
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["track", "--graph", gpath, "--perturbation", ppath,
            "--window", "3,3.3,-0.5,0", "--tmax", "0.02"]
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


@pytest.mark.skipif(shutil.which("qgres") is None,
                    reason="console script not on PATH")
def test_console_script_runs():
    out = subprocess.run(["qgres", "eigs", "--fixture", "cycle:2",
                          "--window", "1,10,-0.5,0"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.startswith("lambda,multiplicity")
    assert len(out.stdout.strip().split("\n")) == 4
