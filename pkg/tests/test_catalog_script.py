import importlib.util
import json
import sys
from pathlib import Path

SCRIPT = Path(__file__).resolve().parent.parent / "scripts" / "catalog_counts.py"


def _load():
    spec = importlib.util.spec_from_file_location("catalog_counts", SCRIPT)
    module = importlib.util.module_from_spec(spec)
    # dataclass resolves annotations through sys.modules
    sys.modules[spec.name] = module
    spec.loader.exec_module(module)
    return module


def test_collect_matches_published_counts():
    module = _load()
    rows = module.collect(3)
    assert [row.total for row in rows] == [1, 2, 5, 16]
    assert all(row.matches for row in rows)


def test_script_writes_rows(tmp_path, capsys):
    module = _load()
    target = tmp_path / "rows.json"
    assert module.main(["--max-size", "2", "--output", str(target), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    rows = json.loads(target.read_text(encoding="utf-8"))
    assert [row["total"] for row in rows] == [1, 2, 5]
    assert rows[2]["by_rank"] == {"0": 1, "1": 3, "2": 1}
