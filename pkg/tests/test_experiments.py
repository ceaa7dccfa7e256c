import numpy as np
import pandas as pd
import pytest

from variata.experiments import (ExperimentGrid, PValueTable, ks_critical, null_truth, full_grid,
                                 run_grid, summarize, thread_count)


def _table(p, null=True):
    rows = [["M3", 100, i, "TE-SE", v, 0.0, 1.0, null, ""] for i, v in enumerate(p)]
    return PValueTable(pd.DataFrame(rows, columns=["scm", "n", "rep", "interaction", "p_value",
                                                   "estimate", "se", "null_true", "error"]))


def test_uniform_pvalues_pass_ks():
    p = np.random.default_rng(0).uniform(size=100)
    cell = summarize(_table(p)).cells[0]
    assert cell["ks_distance"] < 0.136
    assert ks_critical(100) == pytest.approx(0.1340, abs=5e-4)
    assert cell["label"] == "type_I"


def test_all_small_pvalues_reject():
    cell = summarize(_table([0.001] * 20, null=False)).cells[0]
    assert cell["rejection_rate"] == 1.0 and cell["label"] == "power"


def test_errors_recorded_not_dropped():
    t = _table([0.5, 0.2])
    t.frame.loc[1, "error"] = "ValueError: boom"
    t.frame.loc[1, "p_value"] = np.nan
    cell = summarize(t).cells[0]
    assert cell["errors"] == 1 and cell["reps"] == 2 and cell["rejection_rate"] == 0.0


def test_grid_validation():
    with pytest.raises(ValueError):
        ExperimentGrid(sizes=(2000, 500))
    with pytest.raises(ValueError):
        ExperimentGrid(reps=0)
    with pytest.warns(RuntimeWarning):
        g = full_grid()
    assert g.sizes == (500, 750, 1500, 3000, 5000, 8000) and g.reps == 100


def test_null_truth_flags():
    assert null_truth("M3") == dict.fromkeys(["TE-SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE"], True)
    assert not any(null_truth("M5").values())


def test_thread_env(monkeypatch):
    monkeypatch.setenv("VARIATA_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("VARIATA_THREADS", "zero")
    with pytest.raises(ValueError):
        thread_count()


def test_run_grid_deterministic_and_worker_independent(monkeypatch):
    grid = ExperimentGrid(scms=("C6",), sizes=(300, 600), reps=3)
    monkeypatch.setenv("VARIATA_THREADS", "1")
    a = run_grid(grid).frame
    monkeypatch.setenv("VARIATA_THREADS", "2")
    b = run_grid(grid, n_jobs=2).frame
    pd.testing.assert_frame_equal(a, b)
    assert len(a) == 2 * 3 * 5
    assert (a["error"] == "").all()


def test_pvalue_csv_round_trip(tmp_path):
    t = _table([0.1, 0.7])
    t.to_csv(tmp_path / "p.csv")
    back = PValueTable.from_csv(tmp_path / "p.csv")
    np.testing.assert_array_equal(back.frame["p_value"], t.frame["p_value"])
