import json

import pytest

from homocone.cli import join_negative_values, run


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if len(out.strip()) > 0 else None


def test_join_negative_values():
    argv = ["sample", "sym2", "--s", "2,2", "--theta", "-1,-1,0", "-n", "5"]
    assert join_negative_values(argv) == ["sample", "sym2", "--s", "2,2", "--theta=-1,-1,0", "-n", "5"]
    assert join_negative_values(["audit", "sym2", "--theta0", "-0.5", "-l", "INFO"])[2] == "--theta0=-0.5"
    assert join_negative_values(["-l", "-1"]) == ["-l", "-1"]


def test_gindikin(capsys):
    code, report = run_json(capsys, ["gindikin", "sym3", "--s", "0.5,0.5,0.5"])
    assert code == 0
    assert report["member"]
    assert report["eps"] == [1, 0, 0]
    assert report["support"]["hyperplane_concentrated"] is False
    code, report = run_json(capsys, ["gindikin", "sym3", "--s", "0.25,0.25,0.25"])
    assert code == 1
    assert not report["member"]


def test_validate(capsys):
    code, report = run_json(capsys, ["validate", "vinberg"])
    assert code == 0
    assert report["irreducible"]
    code, report = run_json(capsys, ["validate", "vinberg-mirrored"])
    assert code == 1
    assert report["axioms"]["V2"]["pass"] is False
    code, report = run_json(capsys, ["validate", "chain"])
    assert code == 1
    assert report["axioms"]["V1"]["pass"] is False
    witness = report["axioms"]["V1"]["witness"]["indices"]
    assert (witness["l"], witness["k"], witness["i"]) == (3, 2, 1)
    code, report = run_json(capsys, ["validate", "half-line-pair"])
    assert code == 0
    assert report["components"] == [[1], [2]]


def test_decompositions(capsys):
    code, report = run_json(capsys, ["decompose", "sym2", "--point", "4,9,0"])
    assert code == 0
    assert report["T"] == pytest.approx([2.0, 3.0, 0.0])
    code, report = run_json(capsys, ["dual-decompose", "sym2", "--xi", "4,9,0"])
    assert code == 0
    assert report["T"] == pytest.approx([2.0, 3.0, 0.0])
    assert run(["decompose", "sym2", "--point", "-1,-1,0"]) == 2


def test_power(capsys):
    code, report = run_json(capsys, ["power", "sym2", "--s", "1,1", "--xi", "4,9,0"])
    assert code == 0
    assert report["value"] == pytest.approx(36.0)


def test_sample_is_reproducible(capsys, monkeypatch):
    assert run(["sample", "sym2", "--s", "2,2", "-n", "20", "--seed", "3"]) == 0
    first = capsys.readouterr().out
    assert run(["sample", "sym2", "--s", "2,2", "-n", "20", "--seed", "3", "--workers", "3"]) == 0
    assert capsys.readouterr().out == first
    monkeypatch.setenv("HOMOCONE_SEED", "3")
    assert run(["sample", "sym2", "--s", "2,2", "-n", "20"]) == 0
    assert capsys.readouterr().out == first
    lines = first.strip().split("\n")
    assert lines[0] == "d1,d2,b_2_1_1"
    assert len(lines) == 21


def test_sample_tilted_and_singular(capsys):
    assert run(["sample", "sym2", "--s", "2,2", "--theta", "-2,-2,0", "-n", "5"]) == 0
    capsys.readouterr()
    assert run(["sample", "sym2", "--s", "0,1", "-n", "5"]) == 0
    rows = capsys.readouterr().out.strip().split("\n")[1:]
    assert all(row.split(",")[0] == "0.0" for row in rows)


def test_sample_output_file(tmp_path, capsys):
    filename = str(tmp_path / "x.csv")
    argv = ["sample", "sym2", "--s", "2,2", "-n", "10", "-o", filename]
    assert run(argv) == 0
    assert run(argv) == 2
    assert run(argv + ["-f"]) == 0
    assert (tmp_path / "x.csv.json").exists()


def test_bad_input(capsys, tmp_path):
    assert run(["power", "sym2", "--s", "1,a", "--xi", "1,1,0"]) == 2
    assert run(["validate", "dodecahedron"]) == 2
    assert run(["gindikin", "sym2"]) == 2
    assert run(["sample", "sym2", "--s", "0.25,0.25", "-n", "5"]) == 2
    assert run(["sample", "sym2", "--s", "2,2", "--theta", "1,1,0", "-n", "5"]) == 2
    assert run(["gindikin", "sym2", "--s", "1,1", "--set", "bogus=1"]) == 2
    assert run(["power", "sym2", "--s", "1,1,1", "--xi", "1,1,0"]) == 2
    assert run(["validate", "sym2", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_flip_demo(capsys):
    code, report = run_json(capsys, ["flip-demo", "sym3", "--eps", "1,-1,1", "--k", "1", "--l", "2"])
    assert code == 0
    assert report["eps_prime"] == [-1, -1, 1]
    assert report["pass"]
    assert run(["flip-demo", "vinberg", "--eps", "1,-1,1", "--k", "1", "--l", "2"]) == 2
    assert run(["flip-demo", "sym3", "--eps", "1,1,1", "--k", "1", "--l", "2"]) == 2


def test_audit_without_bridge(capsys, tmp_path):
    filename = str(tmp_path / "audit.json")
    assert run(["audit", "half-line-pair", "--s", "1,1", "-n", "500", "-o", filename]) == 1
    with open(filename) as f:
        report = json.load(f)
    assert report["pass"] is False
    convexity = [step for step in report["steps"] if step["name"] == "convexity"][0]
    assert convexity["metrics"]["error"] == "NoBridge"


@pytest.mark.slow
def test_laplace_check(capsys):
    code, report = run_json(capsys, ["laplace-check", "sym2", "--s", "2,2"])
    assert code == 0
    assert len(report["points"]) == 6
    assert report["points"][-1]["eta"] == "-3E_11"


@pytest.mark.slow
@pytest.mark.parametrize("argv", [["audit", "sym2", "--s", "2,2", "--theta0", "-1,-1,0"],
                                  ["audit", "vinberg", "--s", "1,1,2"],
                                  ["audit", "vinberg", "--s", "1,1,2", "--reflected"]])
def test_audits_pass(capsys, argv):
    code, report = run_json(capsys, argv)
    assert code == 0, report
