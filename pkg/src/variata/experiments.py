"""Synthetic calibration study: p-value tables, ECDFs, KS distances and rejection rates.

Each (scm, n, rep) cell samples a dataset from a built-in model, cross-fits
nuisances, estimates the five interaction measures and records their Wald
p-values. Repetitions run in parallel (joblib, capped by ``VARIATA_THREADS``)
and each owns a seed derived from ``(seed_base, scm, n, rep)``, so the table
does not depend on the number of workers.
"""
from __future__ import annotations

import os
import warnings
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from .builtin import builtin_scm
from .effects import effect
from .estimators import effect_estimate
from .inference import SCHEMA_VERSION, wald_test
from .learners import LearnerConfig
from .nuisance import fit_nuisances, make_fold_plan
from .scm import sample_observational
from .structural import MechanismShape, check_all

__all__ = ["ExperimentGrid", "PValueTable", "Summary", "run_grid", "summarize",
           "desk_grid", "full_grid", "null_truth", "thread_count", "INTERACTIONS"]

INTERACTIONS = ("TE-SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE")
DESK_SIZES = (500, 2000, 8000)
FULL_SIZES = (500, 750, 1500, 3000, 5000, 8000)
COLUMNS = ["scm", "n", "rep", "interaction", "p_value", "estimate", "se", "null_true", "error"]


def thread_count() -> int:
    """Worker cap from ``VARIATA_THREADS`` (default: all CPUs)."""
    raw = os.environ.get("VARIATA_THREADS")
    cpus = os.cpu_count() or 1
    if raw is None or raw == "":
        return cpus
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"VARIATA_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ValueError(f"VARIATA_THREADS must be a positive integer, got {raw!r}")
    return k


@dataclass
class ExperimentGrid:
    """Models, sample sizes and repetitions for a calibration run.

    ``learner=None`` picks boosted stumps for models with continuous
    exogenous noise and frequency tables for finite models.
    """

    scms: tuple = ("M1", "M2", "M3", "M4", "M5")
    sizes: tuple = DESK_SIZES
    reps: int = 20
    alpha: float = 0.05
    seed_base: int = 0
    estimator: str = "onestep"
    learner: LearnerConfig | None = None
    folds: int = 5

    def __post_init__(self):
        self.scms = tuple(self.scms)
        self.sizes = tuple(int(n) for n in self.sizes)
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not self.scms or not self.sizes:
            raise ValueError("grid needs at least one model and one sample size")
        if list(self.sizes) != sorted(self.sizes):
            raise ValueError("sizes must be sorted ascending")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.estimator not in ("plugin", "onestep"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    def learner_for(self, spec) -> LearnerConfig:
        if self.learner is not None:
            return self.learner
        return LearnerConfig(kind="table" if spec.finite else "stumps")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scms"] = list(self.scms)
        d["sizes"] = list(self.sizes)
        d["learner"] = self.learner.to_dict() if self.learner is not None else "auto"
        return d


def desk_grid(**kw) -> ExperimentGrid:
    """20 reps at n in {500, 2000, 8000} on M1-M5."""
    return ExperimentGrid(**kw)


def full_grid(**kw) -> ExperimentGrid:
    """100 reps at six sizes on M1-M5; slow at desk scale."""
    warnings.warn("the full grid (5 models x 6 sizes x 100 reps) runs for hours on one CPU",
                  RuntimeWarning, stacklevel=2)
    kw.setdefault("sizes", FULL_SIZES)
    kw.setdefault("reps", 100)
    return ExperimentGrid(**kw)


def null_truth(scm: str) -> dict:
    """Interaction -> True when the structural criterion says no interaction."""
    shape = MechanismShape.from_spec(builtin_scm(scm))
    return {v.criterion: not v.interaction for v in check_all(shape, "mean")}


def cell_seed(seed_base: int, scm: str, n: int, rep: int) -> int:
    ss = np.random.SeedSequence([int(seed_base), zlib.crc32(scm.encode()), int(n), int(rep)])
    return int(ss.generate_state(1)[0])


def _run_cell(grid: ExperimentGrid, scm: str, n: int, rep: int, truth: dict) -> list:
    seed = cell_seed(grid.seed_base, scm, n, rep)
    rows = []
    try:
        spec = builtin_scm(scm)
        data = sample_observational(spec, n, seed=seed)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fits = fit_nuisances(data, make_fold_plan(data.x, grid.folds, seed), grid.learner_for(spec))
        cache = {}
        for name in INTERACTIONS:
            est = effect_estimate(fits, data, effect(name, "mean"), grid.estimator, cache)
            res = wald_test(name, est.value, est.se, grid.alpha)
            rows.append([scm, n, rep, name, res.p_value, res.estimate, res.se, truth[name], ""])
    except Exception as exc:  # recorded, not dropped
        msg = f"{type(exc).__name__}: {exc}"
        done = {r[3] for r in rows}
        for name in INTERACTIONS:
            if name not in done:
                rows.append([scm, n, rep, name, np.nan, np.nan, np.nan, truth[name], msg])
    return rows


@dataclass
class PValueTable:
    """One row per (scm, n, rep, interaction) test; ``error`` is empty on success."""

    frame: pd.DataFrame
    grid: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        self.frame.to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_csv(cls, path) -> "PValueTable":
        df = pd.read_csv(path, keep_default_na=False, na_values=[""], float_precision="round_trip",
                         dtype={"error": str, "scm": str, "interaction": str})
        df["error"] = df["error"].fillna("")
        return cls(df)

    def __len__(self):
        return len(self.frame)


def run_grid(grid: ExperimentGrid, n_jobs: int | None = None) -> PValueTable:
    """Run every (scm, n, rep) cell and collect the five p-values of each."""
    truths = {s: null_truth(s) for s in grid.scms}
    cells = [(s, n, r) for s in grid.scms for n in grid.sizes for r in range(grid.reps)]
    jobs = min(n_jobs or thread_count(), thread_count(), len(cells))
    if jobs > 1:
        parts = Parallel(n_jobs=jobs)(delayed(_run_cell)(grid, s, n, r, truths[s]) for s, n, r in cells)
    else:
        parts = [_run_cell(grid, s, n, r, truths[s]) for s, n, r in cells]
    rows = [row for part in parts for row in part]
    return PValueTable(pd.DataFrame(rows, columns=COLUMNS), grid.to_dict())


def ks_critical(m: int, alpha: float = 0.05) -> float:
    """Two-sided one-sample KS critical distance at level ``alpha`` for ``m`` draws."""
    return float(stats.kstwo.ppf(1 - alpha, m))


@dataclass
class Summary:
    """Per-cell calibration summary and ECDF points."""

    cells: list
    ecdf: pd.DataFrame
    alpha: float

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "kind": "experiment_summary",
                "alpha": self.alpha, "cells": self.cells}

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.cells)

    def rate(self, scm, n, interaction) -> float:
        for c in self.cells:
            if c["scm"] == scm and c["n"] == n and c["interaction"] == interaction:
                return c["rejection_rate"]
        raise KeyError((scm, n, interaction))


def summarize(table: PValueTable, alpha: float = 0.05, grid_points: int = 101) -> Summary:
    """ECDF, KS distance against Uniform[0, 1] and rejection rate for each cell.

    Cells are labeled ``type_I`` when the structural criterion says there is
    no interaction and ``power`` otherwise. Failed repetitions are counted
    in ``errors`` and left out of the rates.
    """
    df = table.frame
    if len(df) == 0:
        raise ValueError("empty p-value table")
    ts = np.linspace(0.0, 1.0, grid_points)
    cells, ecdf_rows = [], []
    for (scm, n, name), grp in df.groupby(["scm", "n", "interaction"], sort=False):
        ok = grp[grp["error"] == ""]
        p = np.sort(ok["p_value"].to_numpy(dtype=float))
        m = p.shape[0]
        null = bool(grp["null_true"].iloc[0])
        cell = {"scm": scm, "n": int(n), "interaction": name, "null_true": null,
                "label": "type_I" if null else "power", "reps": int(len(grp)),
                "errors": int(len(grp) - m)}
        if m:
            ks = stats.kstest(p, "uniform")
            cell.update(rejection_rate=float(np.mean(p < alpha)), ks_distance=float(ks.statistic),
                        ks_pvalue=float(ks.pvalue), ks_critical=ks_critical(m, 0.05))
            for t, f in zip(ts, np.searchsorted(p, ts, side="right") / m):
                ecdf_rows.append((scm, int(n), name, null, float(t), float(f)))
        else:
            cell.update(rejection_rate=float("nan"), ks_distance=float("nan"),
                        ks_pvalue=float("nan"), ks_critical=float("nan"))
        cells.append(cell)
    ecdf = pd.DataFrame(ecdf_rows, columns=["scm", "n", "interaction", "null_true", "p", "ecdf"])
    return Summary(cells, ecdf, alpha)
