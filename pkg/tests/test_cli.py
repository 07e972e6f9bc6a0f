from __future__ import annotations

import json

import numpy as np
import pytest

from distcov import load_matrix_dump, load_table, matrix_checksum
from distcov.cli import main


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "data.txt"
    assert main(["gen", "--rows", "40", "--cols", "9", "--seed", "7", "--out", str(path)]) == 0
    return path


def _run_json(capsys, argv) -> dict:
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


# --- schedule ----------------------------------------------------------------

def test_schedule_text_output(capsys):
    assert main(["schedule", "--sites", "5"]) == 0
    out = capsys.readouterr().out
    assert "site 0 <- 4, 3" in out
    assert "valid" in out


def test_schedule_json_output(capsys):
    doc = _run_json(capsys, ["schedule", "--sites", "5", "--json"])
    assert doc["predecessors"] == [[4, 3], [0, 4], [1, 0], [2, 1], [3, 2]]
    assert doc["validation"]["valid"] is True


def test_schedule_single_site(capsys):
    doc = _run_json(capsys, ["schedule", "--sites", "1", "--json"])
    assert doc["predecessors"] == [[]]
    assert doc["validation"]["valid"] is True


def test_schedule_zero_sites_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["schedule", "--sites", "0"])
    assert exc.value.code == 2


# --- gen ----------------------------------------------------------------------

def test_gen_round_trips_exactly(dataset):
    m = load_table(dataset)
    assert m.rows == 40 and m.cols == 9
    from distcov import synthetic_table

    assert m.tobytes() == synthetic_table(40, 9, seed=7).tobytes()


def test_gen_csv(tmp_path, capsys):
    path = tmp_path / "d.csv"
    assert main(["gen", "--rows", "3", "--cols", "2", "--out", str(path), "--format", "csv"]) == 0
    m = load_table(path, format="csv")
    assert m.rows == 3 and m.cols == 2


# --- run -----------------------------------------------------------------------

def test_run_both_modes_same_checksum(dataset, tmp_path, capsys):
    d = _run_json(capsys, ["run", "--inputs", str(dataset), "--mode", "distributed"])
    c = _run_json(capsys, ["run", "--inputs", str(dataset), "--mode", "centralized"])
    assert d["report_version"] == 1 and c["report_version"] == 1
    assert d["partitions"] == 1 and d["mode"] == "distributed"
    assert d["matrix_checksum"] == c["matrix_checksum"]
    assert len(d["top_eigenvalues"]) == 9
    assert c["schedule"] is None and d["schedule"]["t"] == 1


def test_run_multifile_defaults_to_per_file_sites(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["gen", "--rows", "30", "--cols", "4", "--seed", "1", "--out", str(a)])
    main(["gen", "--rows", "30", "--cols", "5", "--seed", "2", "--out", str(b)])
    capsys.readouterr()
    d = _run_json(capsys, ["run", "--inputs", str(a), str(b), "--mode", "distributed"])
    assert d["partitions"] == 2
    assert d["schedule"]["predecessors"] == [[], [0]]
    assert d["dim"] == 9


def test_run_with_spec_file(dataset, tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({
        "total_cols": 9,
        "groups": [
            {"site": 0, "cols": [0, 1, 2, 3]},
            {"site": 1, "cols": [4, 5]},
            {"site": 2, "cols": [6, 7, 8]},
        ],
    }))
    d = _run_json(capsys, [
        "run", "--inputs", str(dataset), "--spec", str(spec_path),
        "--mode", "distributed", "--transport", "tcp",
    ])
    c = _run_json(capsys, ["run", "--inputs", str(dataset), "--mode", "centralized"])
    assert d["partitions"] == 3
    assert d["matrix_checksum"] == c["matrix_checksum"]


def test_run_writes_report_and_dump(dataset, tmp_path, capsys):
    out = tmp_path / "report.json"
    dump = tmp_path / "matrix.bin"
    code = main([
        "run", "--inputs", str(dataset), "--mode", "centralized",
        "--out", str(out), "--dump-matrix", str(dump),
    ])
    assert code == 0
    doc = json.loads(out.read_text())
    m = load_matrix_dump(dump)
    assert matrix_checksum(m) == doc["matrix_checksum"]


def test_run_missing_file_is_data_error(tmp_path, capsys):
    assert main(["run", "--inputs", str(tmp_path / "nope.txt"), "--mode", "centralized"]) == 3


def test_run_preset_on_wrong_width_is_data_error(dataset, capsys):
    code = main(["run", "--inputs", str(dataset), "--preset", "mfeat-3",
                 "--mode", "centralized"])
    assert code == 3


def test_run_ragged_file_is_data_error(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("1 2\n3\n")
    assert main(["run", "--inputs", str(p), "--mode", "centralized"]) == 3


# --- compare --------------------------------------------------------------------

def test_compare_reports_equality(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["gen", "--rows", "35", "--cols", "4", "--seed", "3", "--out", str(a)])
    main(["gen", "--rows", "35", "--cols", "3", "--seed", "4", "--out", str(b)])
    capsys.readouterr()
    plot = tmp_path / "plot.dat"
    doc = _run_json(capsys, [
        "compare", "--inputs", str(a), str(b), "--plot-data", str(plot),
    ])
    [row] = doc["comparisons"]
    assert row["equal"] is True
    assert row["partitions"] == 2
    assert row["cost_model"]["distributed_ops"] > 0
    lines = plot.read_text().strip().splitlines()
    assert lines[0].startswith("#")
    assert lines[1].split()[0] == "2"


def test_compare_corruption_hook_yields_mismatch_exit(tmp_path, capsys):
    a = tmp_path / "a.txt"
    main(["gen", "--rows", "20", "--cols", "4", "--seed", "5", "--out", str(a)])
    capsys.readouterr()
    code = main(["compare", "--inputs", str(a), "--selftest-corrupt"])
    assert code == 5


# --- cost-model -------------------------------------------------------------------

def test_cost_model_widths(capsys):
    doc = _run_json(capsys, ["cost-model", "--widths", "216,140,293"])
    assert doc["widths"] == [216, 140, 293]
    assert doc["centralized_ops"] == 210_276
    assert doc["speedup"] > 1.0


def test_cost_model_equal_widths(capsys):
    doc = _run_json(capsys, ["cost-model", "--sites", "4", "--gamma", "100"])
    assert doc["distributed_ops"] == 25_150
    assert doc["speedup"] == pytest.approx(79_800 / 25_150)


def test_cost_model_sites_without_gamma(capsys):
    assert main(["cost-model", "--sites", "4"]) == 2
