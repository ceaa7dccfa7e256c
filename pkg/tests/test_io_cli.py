import json

import numpy as np
import pandas as pd
import pytest

from variata.builtin import builtin_scm
from variata.cli import main
from variata.data import DataError
from variata.io import bundled_path, ingest_csv, read_roles, report_schema
from variata.scm import sample_observational

ROLES = "[roles]\nX = a\nZ = z\nW = w\nY = y\n"


def _write(tmp_path, csv, roles=ROLES):
    (tmp_path / "d.csv").write_text(csv)
    (tmp_path / "r.roles").write_text(roles)
    return tmp_path / "d.csv", tmp_path / "r.roles"


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_ingest_three_rows(tmp_path):
    d = ingest_csv(*_write(tmp_path, "a,z,w,y\n0,1.5,2,3\n1,0.5,1,4\n1,2,0,5\n"))
    assert d.n == 3 and d.z.shape == (3, 1) and d.x.tolist() == [0, 1, 1]


def test_ingest_non_binary_x(tmp_path):
    with pytest.raises(DataError, match=r"X must be binary \{0,1\}.*remap"):
        ingest_csv(*_write(tmp_path, "a,z,w,y\n1,1,1,1\n2,1,1,1\n"))


def test_ingest_empty_cell_names_row(tmp_path):
    with pytest.raises(DataError, match="column 'y' at row 2"):
        ingest_csv(*_write(tmp_path, "a,z,w,y\n0,1,1,1\n1,1,1,\n"))


def test_ingest_missing_column(tmp_path):
    with pytest.raises(DataError, match="missing"):
        ingest_csv(*_write(tmp_path, "a,z,y\n0,1,1\n"))


def test_ingest_categorical_codebook(tmp_path):
    roles = ROLES + "[categorical]\ncolumns = z\n"
    d = ingest_csv(*_write(tmp_path, "a,z,w,y\n0,red,1,1\n1,blue,1,2\n1,red,0,3\n", roles))
    assert d.codebook == {"z": ["blue", "red"]}
    assert d.z[:, 0].tolist() == [1, 0, 1]


def test_roles_validation(tmp_path):
    (tmp_path / "r.roles").write_text("[roles]\nX = a, b\nY = y\n")
    with pytest.raises(DataError, match="exactly one X"):
        read_roles(tmp_path / "r.roles")


def test_simulate_ingest_round_trip(tmp_path, capsys):
    out = tmp_path / "m1.csv"
    code, _ = run(["simulate", "--scm", "M1", "--n", 300, "--seed", 7, "--out", out], capsys)
    assert code == 0
    d = ingest_csv(out, str(out) + ".roles")
    ref = sample_observational(builtin_scm("M1"), 300, seed=7)
    for a in ("x", "z", "w", "y"):
        np.testing.assert_array_equal(getattr(d, a), getattr(ref, a))


def test_check_m1_matches_table(capsys):
    code, out = run(["check", "--scm", "M1"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1
    assert [v["verdict"] for v in doc["verdicts"]] == ["interaction"] * 3 + ["no-interaction"] * 2


def test_decompose_happy_path(tmp_path, capsys):
    data = tmp_path / "c6.csv"
    run(["simulate", "--scm", "C6", "--n", 4000, "--seed", 1, "--out", data], capsys)
    code, out = run(["decompose", "--data", data, "--roles", f"{data}.roles", "--scale", "mean",
                     "--alpha", 0.05, "--folds", 5], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["form"] in ("3-term", "4-term-deie", "4-term-tese", "5-term")
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(doc, report_schema())
    assert doc["config"]["folds"] == 5


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[settings]\nalpha = 0.2\nfolds = 3\n")
    code, out = run(["test", "--scm", "C6", "--n", 2000, "--config", cfg, "--alpha", 0.01], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["config"]["alpha"] == 0.01 and doc["config"]["folds"] == 3


@pytest.mark.parametrize("argv,status", [
    (["bogus"], 2),
    ([], 2),
    (["decompose", "--data", "x.csv", "--scm", "M1"], 2),
    (["decompose", "--data", "x.csv"], 2),
    (["check", "--scm", "M1", "--alpha", "1.5"], 2),
    (["check", "--scm", "nope"], 2),
    (["test", "--scm", "C6", "--hypothesis", "z-DE-IE"], 2),
])
def test_errors_are_json(argv, status, capsys):
    code, out = run(argv, capsys)
    doc = json.loads(out)
    assert code == status and doc["kind"] == "error" and doc["message"]


def test_runtime_error_exit_code(tmp_path, capsys):
    data, roles = _write(tmp_path, "a,z,w,y\n0,1,1,1\n2,1,1,1\n")
    code, out = run(["decompose", "--data", data, "--roles", roles], capsys)
    assert code == 1 and "binary" in json.loads(out)["message"]


def test_experiment_outputs(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("VARIATA_THREADS", "1")
    out = tmp_path / "exp"
    argv = ["experiment", "--scms", "C6", "--sizes", 400, "--reps", 2, "--out", out]
    assert run(argv, capsys)[0] == 0
    first = (out / "pvalues.csv").read_text()
    assert run(argv, capsys)[0] == 0
    assert (out / "pvalues.csv").read_text() == first
    table = pd.read_csv(out / "pvalues.csv")
    assert len(table) == 10
    assert json.loads((out / "summary.json").read_text())["schema_version"] == 1
    assert (out / "ecdf.csv").exists()


def test_bundled_files_present():
    assert bundled_path("census_like.csv").is_file()
    assert read_roles(bundled_path("census_like.roles"))["X"] == ["sex"]
