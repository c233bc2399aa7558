import json

import pytest

from app import cli


def _run(capsys, *argv):
    code = cli.main(list(argv) + ["--json"])
    output = capsys.readouterr().out.strip()
    return code, json.loads(output) if output else None


def test_cli_show(capsys):
    code, data = _run(capsys, "show", "--m", "matroid U24; uniform r=2 n=4")
    assert code == 0
    assert data["name"] == "U24"
    assert data["ground"] == 4
    assert data["rank"] == 2
    assert data["circuits"] == [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]


def test_cli_verify_axioms(capsys):
    code, data = _run(capsys, "verify", "axioms", "--m", "graphic n=4 edges=1-2,1-3,1-4,2-3,2-4,3-4")
    assert code == 0
    assert data["passed"] is True


@pytest.mark.parametrize(
    "values, axiom",
    [
        ("1,1,1,2", "normalization"),
        ("0,0,0,1", "submodularity"),
        ("0,2,1,2", "unit_increase"),
    ],
)
def test_cli_verify_axioms_reports_violations(capsys, values, axiom):
    code, data = _run(capsys, "verify", "axioms", "--m", f"ranks n=2 values={values}")
    assert code == 1
    assert data["passed"] is False
    assert data["witness"]["axiom"] == axiom


def test_cli_star_failure_exits_one(capsys):
    code, data = _run(capsys, "lift", "verify-star", "--m", "uniform r=1 n=3", "--n", "free")
    assert code == 1
    assert data["passed"] is False
    assert data["witness"]["collection"] == [[0, 1], [0, 2]]
    assert data["witness"]["circuit_index"] == 2


def test_cli_lift_construct(capsys):
    code, data = _run(capsys, "lift", "construct", "--m", "uniform r=1 n=4", "--n", "pairs-graphic")
    assert code == 0
    assert data["rank"] == 4
    assert data["circuits"] == []


def test_cli_brylawski(capsys):
    code, data = _run(capsys, "lift", "brylawski", "--m", "uniform r=2 n=4", "--class", "none")
    assert code == 0
    assert data["rank"] == 3
    assert data["circuits"] == [[0, 1, 2, 3]]

    code, data = _run(capsys, "lift", "brylawski", "--m", "uniform r=2 n=4", "--class", "0,1")
    assert code == 1
    assert data["witness"]["c"] == [0, 2, 3]


def test_cli_gain_build(capsys):
    code, data = _run(capsys, "gain", "build", "--n", "3", "--group", "Z2")
    assert code == 0
    assert data == {"balanced": 4, "cycles": 11, "edges": 6, "graph": "K3^Z2", "rank": 2}


def test_cli_gain_diagnose(capsys):
    code, data = _run(capsys, "gain", "diagnose", "--m", "pglift:2,2,2", "--n", "3")
    assert code == 0
    assert data["rank"] == 4
    assert data["classes"] == [["(0,1)"], ["(1,0)"], ["(1,1)"]]


def test_cli_derived_compute(capsys):
    code, data = _run(capsys, "derived", "compute", "--rep", "linear p=2 rows=1 cols=3 data=1,1,1")
    assert code == 0
    assert data["rank"] == 2
    assert data["corank"] == 2
    assert data["vectors"] == [[1, 1, 0], [1, 0, 1], [0, 1, 1]]


def test_cli_project_bridge(capsys):
    code, data = _run(capsys, "project", "bridge", "--k", "uniform r=2 n=4", "--n", "uniform:1")
    assert code == 0
    assert data["check"] == "duality_bridge"
    assert data["passed"] is True


def test_cli_lab_catalog(capsys):
    code, data = _run(capsys, "lab", "catalog", "--size", "4")
    assert code == 0
    assert sum(data["counts"].values()) == data["published"] == 68


def test_cli_lab_report_file(capsys, tmp_path):
    target = tmp_path / "c73.json"
    code, data = _run(
        capsys, "lab", "c73", "--m", "uniform r=1 n=4", "--k", "free n=4", "--output", str(target)
    )
    assert code == 0
    assert data["status"] == "CONFIRMED"
    saved = json.loads(target.read_text(encoding="utf-8"))
    assert saved["status"] == "CONFIRMED"
    assert saved["family_size"] == data["family_size"]


def test_cli_text_output_is_repeatable(capsys):
    argv = ["lab", "c73", "--m", "uniform r=1 n=3", "--k", "free n=3"]
    assert cli.main(argv) == 0
    first = capsys.readouterr().out
    assert cli.main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    assert "runtimes" not in first


def test_cli_bad_spec_is_usage_error(capsys):
    code = cli.main(["show", "--m", "uniform r=3 n=2"])
    assert code == 2
    assert "Error: line 1: r > n" in capsys.readouterr().err


def test_cli_missing_argument_is_usage_error(capsys):
    assert cli.main(["show"]) == 2


def test_cli_capacity_exit_code(capsys):
    assert cli.main(["show", "--m", "free n=10", "--max-ground", "5"]) == 3
    assert "exceeds capacity 5" in capsys.readouterr().err


def test_cli_capacity_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("LIFTFORGE_MAX_GROUND", "5")
    assert cli.main(["show", "--m", "free n=6"]) == 3
    monkeypatch.delenv("LIFTFORGE_MAX_GROUND")
    assert cli.main(["show", "--m", "free n=6"]) == 0
