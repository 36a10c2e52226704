import csv
import io
import json
import math

import pytest

from epr_witness.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, main, point_record


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_point_record_entangled():
    record = point_record(0.5, 0.8)
    assert record["region"] == "Entangled"
    assert math.isclose(record["witness"], -0.39 / 2.78)
    assert math.isclose(record["ppt_nu_minus"], 0.2)
    assert record["squeezed"] is True
    assert record["warning"] is None


def test_point_record_degenerate_vacuum():
    record = point_record(0, 0)
    assert record["region"] == "PureBoundary"
    assert record["witness"] is None
    assert "degenerate" in record["warning"]
    assert math.isclose(record["ppt_nu_minus"], 0.5)


def test_classify_json(capsys):
    code, out, err = _run(capsys, "classify", "--nbar", "0.5", "--m", "0.8")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["data"]["region"] == "Entangled"
    assert math.isclose(doc["data"]["witness"], -0.39 / 2.78)
    assert math.isclose(doc["data"]["ppt_nu_minus"], 0.2)
    assert doc["manifest"]["command"] == "classify"
    assert doc["manifest"]["parameters"]["nbar"] == 0.5
    assert "[OK]" in err


def test_classify_unphysical_warns(capsys):
    code, out, err = _run(capsys, "classify", "--nbar", "0.1", "--m", "1")
    assert code == EXIT_OK
    data = json.loads(out)["data"]
    assert data["region"] == "Unphysical"
    assert data["witness"] is None
    assert data["warning"]
    assert "[WARN]" in err


def test_classify_nan_is_invalid(capsys):
    code, _, err = _run(capsys, "classify", "--nbar", "nan", "--m", "0.5")
    assert code == EXIT_INVALID
    assert "[ERR]" in err


def test_classify_oracle_uses_env_cutoff(capsys, config_home, monkeypatch):
    monkeypatch.setenv("EPRW_DEFAULT_CUTOFF", "24")
    code, out, err = _run(capsys, "classify", "--nbar", "0.5", "--m", "0.8", "--oracle")
    assert code == EXIT_OK
    data = json.loads(out)["data"]
    assert abs(data["oracle_witness"] - data["witness"]) < 1e-6
    assert "cutoff 24" in err


def test_classify_oracle_bad_env(capsys, config_home, monkeypatch):
    monkeypatch.setenv("EPRW_DEFAULT_CUTOFF", "many")
    code, _, _ = _run(capsys, "classify", "--nbar", "0.5", "--m", "0.8", "--oracle")
    assert code == EXIT_INVALID


def test_classify_unwritable_output(capsys, tmp_path):
    target = tmp_path / "missing" / "out.json"
    code, _, _ = _run(capsys, "classify", "--nbar", "0.5", "--m", "0.8", "--out", str(target))
    assert code == EXIT_INVALID


def test_sweep_single_point_matches_classify(capsys):
    _, out, _ = _run(capsys, "classify", "--nbar", "0.5", "--m", "0.8")
    classified = json.loads(out)["data"]

    code, out, _ = _run(capsys, "sweep", "--nbar-range", "0.5", "0.5", "1", "--m-range", "0.8", "0.8", "1")
    assert code == EXIT_OK
    (row,) = _csv_rows(out)
    assert row["region"] == classified["region"]
    assert float(row["witness"]) == classified["witness"]
    assert float(row["visibility"]) == classified["visibility"]
    assert float(row["ppt_nu_minus"]) == classified["ppt_nu_minus"]


def test_sweep_ordering_and_determinism(capsys):
    argv = ("sweep", "--nbar-range", "0.5", "1", "2", "--m-range", "0", "1", "2")
    _, first, _ = _run(capsys, *argv)
    _, second, _ = _run(capsys, *argv)
    assert first == second
    assert first.startswith("nbar,m,region,witness,visibility,ppt_nu_minus\r\n")

    rows = _csv_rows(first)
    assert [(float(r["nbar"]), float(r["m"])) for r in rows] == [(0.5, 0), (1, 0), (0.5, 1), (1, 1)]


def test_sweep_witness_sign_flip(capsys):
    _, out, _ = _run(capsys, "sweep", "--nbar-range", "1", "1", "1", "--m-range", "0.9", "1.1", "3",
                     "--outputs", "witness,region")
    rows = _csv_rows(out)
    assert list(rows[0].keys()) == ["nbar", "m", "region", "witness"]
    assert float(rows[0]["witness"]) > 0
    assert float(rows[-1]["witness"]) < 0
    assert rows[-1]["region"] == "Entangled"


def test_sweep_unphysical_cells_empty(capsys):
    _, out, _ = _run(capsys, "sweep", "--nbar-range", "0.1", "0.1", "1", "--m-range", "1", "1", "1")
    (row,) = _csv_rows(out)
    assert row["region"] == "Unphysical"
    assert row["witness"] == ""


def test_sweep_config_file_and_json(capsys, tmp_path):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({"nbar_range": [1, 2, 2], "m_range": [0, 0, 1], "outputs": ["region"]}))
    out_path = tmp_path / "grid.json"
    code, _, _ = _run(capsys, "sweep", "--config", str(config), "--format", "json", "--out", str(out_path))
    assert code == EXIT_OK
    doc = json.loads(out_path.read_text(encoding="utf-8"))
    assert [row["nbar"] for row in doc["data"]] == [1.0, 2.0]
    assert set(doc["data"][0]) == {"nbar", "m", "region"}


def test_sweep_csv_file_writes_manifest(capsys, tmp_path):
    out_path = tmp_path / "grid.csv"
    code, _, _ = _run(capsys, "sweep", "--nbar-range", "1", "1", "1", "--m-range", "0", "0", "1",
                      "--out", str(out_path))
    assert code == EXIT_OK
    manifest = json.loads((tmp_path / "grid.csv.manifest.json").read_text(encoding="utf-8"))
    assert manifest["command"] == "sweep"
    assert manifest["parameters"]["nbar_range"] == [1.0, 1.0, 1.0]


def test_sweep_bad_outputs(capsys):
    code, _, _ = _run(capsys, "sweep", "--outputs", "witness,bogus")
    assert code == EXIT_INVALID


def test_hom_csv(capsys):
    code, out, _ = _run(capsys, "hom", "--nbar", "0.5", "--m", "0.8", "--tau-c", "1", "--tau-range", "-1", "1", "3")
    assert code == EXIT_OK
    rows = _csv_rows(out)
    assert [float(r["tau"]) for r in rows] == [-1.0, 0.0, 1.0]
    v = 0.89 / 1.39
    assert math.isclose(float(rows[1]["p"]), 1 - v)
    assert math.isclose(float(rows[0]["p"]), 1 - v / math.e)


def test_hom_default_range(capsys):
    _, out, _ = _run(capsys, "hom", "--nbar", "1", "--m", "0", "--tau-c", "2")
    rows = _csv_rows(out)
    assert len(rows) == 101
    assert float(rows[0]["tau"]) == -10.0


def test_hom_rejects_bad_tau_c(capsys):
    code, _, _ = _run(capsys, "hom", "--nbar", "0.5", "--m", "0.8", "--tau-c", "0")
    assert code == EXIT_INVALID
    code, _, _ = _run(capsys, "hom", "--nbar", "0", "--m", "0", "--tau-c", "1")
    assert code == EXIT_INVALID


def test_homodyne_sim(capsys, tmp_path):
    records = tmp_path / "records.csv"
    argv = ("homodyne-sim", "--nbar", "0.5", "--m", "0.8", "--samples", "20000", "--seed", "7",
            "--records-out", str(records))
    code, out, _ = _run(capsys, *argv)
    assert code == EXIT_OK
    doc = json.loads(out)
    data = doc["data"]
    assert math.isclose(data["analytic_strong_lo"], 0.8)
    assert math.isclose(data["analytic_exact"], 0.855)
    assert data["shot_noise"] == 2.0
    assert abs(data["estimate"] - 0.8) < 5 * data["std_error"]
    assert data["verdict"] == "BelowShotNoise"
    assert doc["manifest"]["seeds"] == [7]
    assert records.read_text(encoding="utf-8").startswith("index,x_c,x_d")

    _, again, _ = _run(capsys, *argv)
    assert json.loads(again)["data"] == data


def test_homodyne_sim_too_few_samples(capsys):
    code, _, _ = _run(capsys, "homodyne-sim", "--nbar", "0.5", "--m", "0.8", "--samples", "1")
    assert code == EXIT_INVALID


def test_homodyne_sim_unphysical(capsys):
    code, _, _ = _run(capsys, "homodyne-sim", "--nbar", "0.1", "--m", "1", "--samples", "10")
    assert code == EXIT_INVALID


def test_verify_small_grid(capsys, config_home):
    code, out, err = _run(capsys, "verify", "--nbar-max", "0.5", "--steps", "2", "--cutoff", "24")
    assert code == EXIT_OK
    rows = _csv_rows(out)
    assert len(rows) == 4
    assert all(r["passed"] == "true" for r in rows)
    assert "[OK]" in err


def test_verify_uses_env_cutoff(capsys, config_home, monkeypatch):
    monkeypatch.setenv("EPRW_DEFAULT_CUTOFF", "24")
    code, out, err = _run(capsys, "verify", "--nbar-max", "0.5", "--steps", "2")
    assert code == EXIT_OK
    assert {r["cutoff"] for r in _csv_rows(out)} == {"24"}
    assert "cutoff 24" in err


def test_verify_failure_exit_code(capsys, config_home):
    code, out, err = _run(capsys, "verify", "--nbar-max", "0.5", "--steps", "2", "--cutoff", "24", "--tol", "1e-30")
    assert code == EXIT_FAILED
    assert any(r["passed"] == "false" for r in _csv_rows(out))
    assert "[ERR]" in err


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
