import json

import numpy as np
import pytest

from ddr import cli
from ddr.shapes import shape_document


@pytest.fixture
def tetra_mesh(tmp_path):
    path = tmp_path / "tetra.json"
    path.write_text(json.dumps(shape_document("tetra")))
    return path


def test_parse_degrees():
    assert cli.parse_degrees("0..3") == [0, 1, 2, 3]
    assert cli.parse_degrees("1,3") == [1, 3]
    assert cli.parse_degrees("2") == [2]
    for bad in ("3..1", "x", "1..y"):
        with pytest.raises(Exception):
            cli.parse_degrees(bad)


def test_parse_suites():
    assert cli.parse_suites(["all"]) == ("exactness", "commutation", "consistency", "dof-tables", "diagnostics")
    assert cli.parse_suites(["exactness,dof-tables", "exactness"]) == ("exactness", "dof-tables")
    with pytest.raises(cli.UsageError):
        cli.parse_suites(["bogus"])


def test_check_mesh_file_all_suites(tetra_mesh, tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["check", "--mesh", str(tetra_mesh), "--degrees", "0..3", "--suite", "all",
                     "--format", "json", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert sum(r["status"] == "pass" for r in data) >= 120
    assert all(r["status"] == "pass" for r in data)
    assert "checks passed" in capsys.readouterr().err


def test_missing_mesh(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert cli.main(["check", "--mesh", str(missing), "--degrees", "0"]) == 2
    assert str(missing) in capsys.readouterr().err


def test_malformed_mesh(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"vertices": [[0, 0, 0]], "faces": [[0, 0, 0]]}')
    assert cli.main(["check", "--mesh", str(path), "--degrees", "0"]) == 2
    path.write_text("not json")
    assert cli.main(["check", "--mesh", str(path), "--degrees", "0"]) == 2


def test_usage_errors(capsys):
    assert cli.main(["check", "--shape", "tetra", "--suite", "bogus"]) == 2
    assert "unknown suite" in capsys.readouterr().err
    assert cli.main(["check", "--shape", "tetra", "--degrees", "3..1"]) == 2
    assert cli.main(["check"]) == 2


def test_dof_table_suite_row(capsys):
    code = cli.main(["check", "--suite", "dof-tables", "--shape", "tetra", "--degrees", "2"])
    assert code == 0
    out = capsys.readouterr().out
    row = next(line for line in out.splitlines() if line.startswith("| tetra | Xgrad | 2 |"))
    assert "32 (20)" in row


def test_dof_tables_command(capsys):
    assert cli.main(["dof-tables", "--shape", "triangle", "--degrees", "3"]) == 0
    out = capsys.readouterr().out
    assert "| triangle | Xrot | 3 |" in out and "27 (24)" in out


def test_loose_rank_tolerance_fails(capsys):
    assert cli.main(["check", "--shape", "square", "--degrees", "1", "--suite", "exactness", "--rank-tol", "1e-2"]) == 1


def test_dump_cube(tmp_path, capsys):
    assert cli.main(["dump", "--shape", "cube", "--degrees", "1", "--out", str(tmp_path)]) == 0
    m = cli.load_matrix(tmp_path / "cube_k1_uG.txt")
    rows, cols = m["rows"], m["cols"]
    assert rows[0] == "Xcurl" and cols[0] == "Xgrad"
    assert m["matrix"].shape == (sum(w for _, w in rows[1]), sum(w for _, w in cols[1]))
    # cube, k=1: Xgrad = 1 + 6 + 12 + 8, Xcurl = 3 + 1 + 6*3 + 12*2
    assert m["matrix"].shape == (46, 27)
    G = cli.load_matrix(tmp_path / "cube_k1_curl_gram.txt")["matrix"]
    assert np.array_equal(G, G.T)


def test_dump_triangle_k0_header(tmp_path, capsys):
    assert cli.main(["dump", "--shape", "triangle", "--degrees", "0", "--out", str(tmp_path)]) == 0
    m = cli.load_matrix(tmp_path / "triangle_k0_uG.txt")
    assert ("F", 0) in m["cols"][1]


def test_dump_is_exact(tmp_path, capsys):
    cli.main(["dump", "--shape", "pentagon", "--degrees", "2", "--out", str(tmp_path)])
    from ddr.ddr2d import FaceSequence
    from ddr.geometry import load_cell

    fs = FaceSequence(load_cell(shape_document("pentagon")).faces[0], 2)
    np.testing.assert_array_equal(cli.load_matrix(tmp_path / "pentagon_k2_rot_gram.txt")["matrix"], fs.rot_gram)


def test_deterministic_and_parallel(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["check", "--shape", "prism", "--degrees", "0..1", "--suite", "commutation", "--format", "json"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b), "--jobs", "2"]) == 0
    strip = lambda p: [{k: v for k, v in r.items() if k != "elapsed"} for r in json.loads(p.read_text())]
    assert strip(a) == strip(b)


def test_multi_cell_mesh(tmp_path, capsys):
    doc = shape_document("cube")
    doc["cells"] = [list(range(6)), list(range(6))]
    path = tmp_path / "two.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "r.json"
    assert cli.main(["check", "--mesh", str(path), "--cell", "1", "--degrees", "0", "--suite", "exactness",
                     "--format", "json", "--out", str(out)]) == 0
    assert {r["cell"] for r in json.loads(out.read_text()) if not r["name"].startswith("tolerance")} == {"cube:1"}
    assert cli.main(["check", "--mesh", str(path), "--cell", "5", "--degrees", "0"]) == 2
