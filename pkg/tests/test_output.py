import json

import pytest

from epr_witness import __version__
from epr_witness.errors import DomainError
from epr_witness.output import RunManifest, render_csv, render_json, write_table


def _manifest():
    return RunManifest(command="sweep", parameters={"nbar_range": [0, 1, 2]}, seeds=[1])


def test_manifest_fields():
    data = _manifest().to_dict()
    assert data["version"] == __version__
    assert data["seeds"] == [1]
    assert data["timestamp"].endswith("+00:00")


def test_render_csv_cells():
    rows = [{"a": 0.1, "b": None, "c": True, "d": float("nan"), "e": "Entangled"}]
    text = render_csv(rows, ["a", "b", "c", "d", "e"])
    assert text == "a,b,c,d,e\r\n0.1,,true,,Entangled\r\n"


def test_render_json_document():
    doc = json.loads(render_json([{"x": float("inf"), "y": 2.5}], ["x", "y"], _manifest()))
    assert doc["data"] == [{"x": None, "y": 2.5}]
    assert doc["manifest"]["command"] == "sweep"


def test_write_table_csv_file(tmp_path):
    out = tmp_path / "t.csv"
    sidecar = write_table([{"x": 1.5}], ["x"], "csv", str(out), _manifest())
    assert out.read_bytes() == b"x\r\n1.5\r\n"
    assert json.loads(open(sidecar, encoding="utf-8").read())["command"] == "sweep"


def test_write_table_json_file_has_no_sidecar(tmp_path):
    out = tmp_path / "t.json"
    assert write_table([{"x": 1.5}], ["x"], "json", str(out), _manifest()) is None
    assert not (tmp_path / "t.json.manifest.json").exists()


def test_write_table_stdout(capsys):
    assert write_table([{"x": 1}], ["x"], "csv", None, _manifest()) is None
    assert capsys.readouterr().out == "x\r\n1\r\n"


def test_write_table_errors(tmp_path):
    with pytest.raises(DomainError):
        write_table([], ["x"], "xml", None, _manifest())
    with pytest.raises(DomainError):
        write_table([], ["x"], "csv", str(tmp_path / "no" / "t.csv"), _manifest())
