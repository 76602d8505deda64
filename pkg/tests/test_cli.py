import json

import pytest

from cubelab.cli import run


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_analyze_racg_k33(fixture_dir, capsys):
    assert run(["analyze", "--family", "racg", str(fixture_dir / "K33.graph")]) == 0
    rep = _json(capsys)
    assert rep["verdict"]["answer"] == "no" and rep["witness_verified"]
    assert rep["config"]["seed"] == 0


def test_analyze_braid_undecided(fixture_dir, capsys):
    assert run(["analyze", "--family", "braid", "--n", "3", str(fixture_dir / "theta-tripod.graph")]) == 2
    assert _json(capsys)["verdict"]["answer"] == "undecided"


def test_analyze_braid_with_oracle(fixture_dir, tmp_path, capsys):
    facts = [{"vertices": ["u", "v"], "k": 2, "cyclic": False},
             {"vertices": ["c", "l1", "l2", "l3"], "k": 2, "cyclic": False}]
    oracle = tmp_path / "oracle.json"
    oracle.write_text(json.dumps(facts))
    code = run(["analyze", "--family", "braid", "--n", "3", "--oracle", str(oracle),
                str(fixture_dir / "theta-tripod.graph")])
    assert code == 0
    assert _json(capsys)["verdict"]["answer"] == "no"


def test_coneoff_csv(fixture_dir, tmp_path, capsys):
    out = tmp_path / "curve.csv"
    assert run(["coneoff", "--family-spec", "canonical", "--radii", "2..4", "--out", str(out),
                str(fixture_dir / "C4.graph")]) == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 4 and rows[0].startswith("radius,")
    assert _json(capsys)["config"]["seed"] == 0


def test_reports_are_byte_identical(fixture_dir, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["coneoff", "--radii", "2..3", "--seed", "5", "--report", str(p),
                    "--out", str(tmp_path / "c.csv"), str(fixture_dir / "C4.graph")]) == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv,cls", [
    (["analyze", "--bogus"], "usage error"),
    (["nonsense"], "usage error"),
    (["coneoff", "--radii", "x..y", "C4.graph"], "usage error"),
])
def test_usage_errors(argv, cls, capsys, monkeypatch, fixture_dir):
    monkeypatch.chdir(fixture_dir)
    assert run(argv) == 1
    assert capsys.readouterr().err.startswith(cls)


def test_input_error_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.graph"
    bad.write_text("v a\ne a b\n")
    assert run(["analyze", "--family", "racg", str(bad)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("input error") and "line 2, column 5" in err


def test_resource_error(fixture_dir, capsys, monkeypatch):
    monkeypatch.setenv("CUBELAB_CAP_VERTICES", "10")
    assert run(["ball", "--family", "racg", "--radius", "5", str(fixture_dir / "C4.graph")]) == 1
    assert capsys.readouterr().err.startswith("resource error")


def test_ball_dump(fixture_dir, tmp_path, capsys):
    dump = tmp_path / "adj.csv"
    assert run(["ball", "--family", "racg", "--radius", "3", "--dump", str(dump),
                str(fixture_dir / "C4.graph")]) == 0
    assert _json(capsys)["ball"]["sphere_sizes"] == [1, 4, 8, 12]
    assert len(dump.read_text().splitlines()) == 1 + 36


def test_geometry_commands(fixture_dir, capsys):
    c4 = str(fixture_dir / "C4.graph")
    assert run(["hyperplanes", "--family", "median", c4]) == 0
    assert _json(capsys)["count"] == 2
    assert run(["interval", "--family", "racg", "--radius", "6", "--x", "e", "--y", "v0 v1", c4]) == 0
    assert _json(capsys)["size"] == 4
    assert run(["staircase", "--family", "racg", "--radius", "8", "--x", "e",
                "--y", "v0 v2 v0 v2", "--z", "v0 v2", c4]) == 0
    assert _json(capsys)["verified"]
    assert run(["flats", "--family", "racg", "--radius", "3", c4]) == 0
    assert _json(capsys)["count"] > 0


def test_hyptree_and_ray(tmp_path, fixture_dir, capsys):
    f2 = tmp_path / "F2.graph"
    f2.write_text("v 0\nv 1\n")
    assert run(["hyptree", "--family", "raag", "--radius", "8", "--a", "0", "--b", "0 1",
                "--J", "e:0", "--A", "0:0^2", "--B", "0:0 1", "--depth", "2", str(f2)]) == 0
    rep = _json(capsys)
    assert rep["tree"]["verified"] and rep["transeparation"]["ok"]
    assert run(["ray", "--family-spec", "words:a0 a1;a1 a2;a0 a2", "--g", "a0 a1 a2",
                "--k", "1..3", str(fixture_dir / "3K1.graph")]) == 0
    d = _json(capsys)["ray"]["distances"]
    assert d["1"] < d["2"] < d["3"]


def test_corpus(fixture_dir, tmp_path, capsys):
    assert run(["corpus", str(fixture_dir), "--families", "racg", "--format", "json"]) == 0
    rows = _json(capsys)["rows"]
    by = {r["file"]: r["answer"] for r in rows}
    assert by["K33.graph"] == "no" and by["C4.graph"] == "yes" and by["theta.graph"] == "skipped"
    assert [r["file"] for r in rows] == sorted(r["file"] for r in rows)

    empty = tmp_path / "empty"
    empty.mkdir()
    assert run(["corpus", str(empty), "--format", "json"]) == 0
    assert _json(capsys)["rows"] == []

    one = tmp_path / "one"
    one.mkdir()
    (one / "broken.graph").write_text("v a\ne a zz\n")
    (one / "ok.graph").write_text("v a\nv b\ne a b\n")
    assert run(["corpus", str(one), "--families", "racg", "--format", "json", "--jobs", "2"]) == 0
    rows = _json(capsys)["rows"]
    assert [r["answer"] for r in rows] == ["error", "yes"]
