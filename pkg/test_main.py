import os

os.environ["LIFTFORGE_WORKERS"] = "1"
os.environ["LIFTFORGE_LOG_LEVEL"] = "WARNING"

import json

from app import cli  # noqa: E402
from app.config import get_settings  # noqa: E402
from app.services.acceptance import run_acceptance_suite  # noqa: E402
from app.services.lifts import LiftedMatroid  # noqa: E402

get_settings.cache_clear()


def test_fast_acceptance_criteria_pass():
    report = run_acceptance_suite("fast")
    assert [r.number for r in report.results] == [1, 3, 8]
    assert all(r.passed for r in report.results), [r.detail for r in report.results if not r.passed]
    assert report.passed


def test_acceptance_detects_a_broken_lift_rank(monkeypatch):
    original = LiftedMatroid.rank

    def off_by_one(self, subset=None):
        return max(original(self, subset) - 1, 0)

    monkeypatch.setattr(LiftedMatroid, "rank", off_by_one)
    report = run_acceptance_suite("fast")
    by_number = {r.number: r for r in report.results}
    assert not by_number[1].passed
    assert not report.passed


def test_acceptance_command(capsys):
    code = cli.main(["acceptance", "--filter", "fast", "--json"])
    assert code == 0
    data = json.loads(capsys.readouterr().out.strip())
    assert [r["number"] for r in data["results"]] == [1, 3, 8]
    assert all(r["passed"] for r in data["results"])


def test_acceptance_text_output_lists_timings(capsys):
    assert cli.main(["acceptance", "--filter", "fast"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("criterion=1 | ")
    assert "result=PASS" in lines[0]
    assert "seconds=" in lines[0]
    assert lines[-1] == "passed=3 | failed=0"


def test_every_acceptance_criterion_passes():
    report = run_acceptance_suite()
    assert [r.number for r in report.results] == list(range(1, 11))
    failed = {r.number: r.detail for r in report.results if not r.passed}
    assert failed == {}
    assert report.passed
    by_number = {r.number: r for r in report.results}
    assert "p = 3, i = 1" in by_number[5].detail
    assert by_number[9].detail == "7 pairs, 6 subclasses"
