"""Acceptance criteria 1-10. Each test records one PASS/FAIL line (printed
in the terminal summary) and then asserts the criterion at its stated
tolerance. Criteria that the stated models cannot meet are marked xfail
with the reason; they still run and still report FAIL."""
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from variata.builtin import builtin_scm
from variata.cli import main
from variata.effects import INTERACTIONS, PoQuery, decomposition, effect, z_de_ie
from variata.estimators import effect_estimate, po_estimate
from variata.experiments import ExperimentGrid, run_grid, summarize
from variata.inference import InferenceError, z_specific_de_ie
from variata.io import bundled_path, report_schema
from variata.learners import LearnerConfig
from variata.nuisance import fit_nuisances, make_fold_plan
from variata.oracle import Contrast, drr_irr, oracle_contrast, oracle_expectation
from variata.scm import sample_observational
from variata.structural import MechanismShape, check_all

SYNTHETIC_SUMMARY = {"M1": "YYY..", "M2": "Y..Y.", "M3": ".....", "M4": "Y.Y..", "M5": "YYYYY"}
FIXTURES = ["C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10", "C11", "C12", "ex7"]


def oracle(spec, eff, event=None, **kw):
    return oracle_contrast(spec, Contrast.from_effect(spec, eff, event), **kw)


@pytest.mark.xfail(strict=True, reason="displayed SCM gives 5/24; 10/99 needs P(X=1|Z=1)=0.6")
def test_criterion_01_worked_value(acceptance):
    t = time.perf_counter()
    got = oracle(builtin_scm("C5"), effect("TE-SE")).value
    dt = time.perf_counter() - t
    alt = oracle(builtin_scm("C5a"), effect("TE-SE")).value
    ok = got == Fraction(10, 99) and dt < 1
    acceptance(1, ok, f"x-TE-SE on displayed SCM = {got} (target 10/99); "
                      f"0.1Z variant = {alt}; {dt * 1e3:.1f} ms")
    assert ok


@pytest.mark.xfail(strict=True, reason="W = 1 - X violates positivity; estimators cannot identify z-DE-IE")
def test_criterion_02_granularity(acceptance):
    t = time.perf_counter()
    s = builtin_scm("ex7")
    z1 = oracle(s, z_de_ie(), event={"Z": 1}).value
    z0 = oracle(s, z_de_ie(), event={"Z": 0}).value
    x_vals = [oracle(s, effect("DE-IE", cond=c)).value for c in (0, 1)]
    oracle_ok = z1 == 1 and z0 == -1 and all(v == 0 for v in x_vals)
    d = sample_observational(s, 50000, seed=7)
    fits = fit_nuisances(d, make_fold_plan(d.x, 10, 0))
    est_notes = []
    est_ok = True
    for zv, target in ((1, 1.0), (0, -1.0)):
        try:
            r = z_specific_de_ie(fits, d, zv)
            hit = abs(r.estimate - target) <= 3 * r.se
            est_notes.append(f"z={zv}: {r.estimate:.3f} (se {r.se:.3f})")
            est_ok &= hit
        except InferenceError as exc:
            est_ok = False
            est_notes.append(f"z={zv}: {exc}")
    xe = effect_estimate(fits, d, effect("DE-IE"))
    est_ok &= xe.se > 0 and abs(xe.value) <= 3 * xe.se
    dt = time.perf_counter() - t
    ok = oracle_ok and est_ok and dt < 60
    acceptance(2, ok, f"oracle z-DE-IE z1={z1} z0={z0} x-DE-IE={x_vals} ({'ok' if oracle_ok else 'bad'}); "
                      f"estimators: {'; '.join(est_notes)}; x-DE-IE {xe.value:.3g} se {xe.se:.3g}; "
                      f"{dt:.1f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="risk factorizes as a(x,z)b(w), so DRR-IRR = 1, not 0.73")
def test_criterion_03_log_risk(acceptance):
    t = time.perf_counter()
    s = builtin_scm("ex13")
    ratio = drr_irr(s, "monte_carlo", 10**6, seed=13)
    dl = oracle(s, effect("DE-IE", "log-risk"), mode="monte_carlo", n=10**6, seed=13)
    dt = time.perf_counter() - t
    ratio_ok = abs(ratio - 0.73) <= 0.02
    dl_ok = abs(dl.value) <= 4 * max(dl.se, 1e-15)
    ok = ratio_ok and dl_ok and dt < 60
    acceptance(3, ok, f"MC DRR-IRR = {ratio:.4f} (target 0.73 +/- 0.02, exact {float(drr_irr(s)):.6f}); "
                      f"x-DLR-ILR = {dl.value:.2e} (se {dl.se:.1e}); {dt:.1f} s")
    assert ok


def test_criterion_04_synthetic_summary(acceptance):
    t = time.perf_counter()
    rows = {}
    for name in SYNTHETIC_SUMMARY:
        verdicts = check_all(MechanismShape.from_spec(builtin_scm(name)))
        rows[name] = "".join("Y" if v.interaction else "." for v in verdicts)
    dt = time.perf_counter() - t
    matched = sum(a == b for m in SYNTHETIC_SUMMARY for a, b in zip(rows[m], SYNTHETIC_SUMMARY[m]))
    ok = matched == 25 and dt < 1
    acceptance(4, ok, f"{matched}/25 cells match; {dt * 1e3:.0f} ms")
    assert ok


def test_criterion_05_admissibility(acceptance):
    t = time.perf_counter()
    checked, bad = set(), []
    for name in FIXTURES:
        s = builtin_scm(name)
        for v in check_all(MechanismShape.from_spec(s)):
            if not v.interaction:
                checked.add(name)
                val = oracle(s, effect(v.criterion)).value
                if val != 0:
                    bad.append((name, v.criterion, val))
    # continuous example: Monte Carlo within 4 SEs
    s = builtin_scm("ex4")
    for v in check_all(MechanismShape.from_spec(s)):
        if not v.interaction:
            checked.add("ex4")
            r = oracle(s, effect(v.criterion), mode="monte_carlo", n=200000, seed=4)
            if abs(r.value) > 4 * r.se + 1e-12:
                bad.append(("ex4", v.criterion, r.value))
    dt = time.perf_counter() - t
    ok = len(checked) >= 6 and not bad and dt < 300
    acceptance(5, ok, f"{len(checked)} fixtures with no-interaction verdicts, violations {bad}; {dt:.1f} s")
    assert ok


def test_criterion_06_identities(acceptance):
    t = time.perf_counter()
    rng = np.random.default_rng(606)
    names = ["C2", "C4", "C5", "C6", "C7", "C10", "C11", "C12"]
    worst = 0.0
    for i in range(50):
        name = names[i % len(names)]
        d = sample_observational(builtin_scm(name), int(rng.integers(400, 3000)), seed=int(rng.integers(2**31)))
        fits = fit_nuisances(d, make_fold_plan(d.x, 5, i))
        kind = ("onestep", "plugin")[i % 2]
        cache = {}
        tv = effect_estimate(fits, d, effect("TV"), kind, cache).value
        for form in ("de-ie-se", "granular"):
            total = sum(effect_estimate(fits, d, e, kind, cache).value for e in decomposition(form))
            worst = max(worst, abs(total - tv))
        parts = sum(effect_estimate(fits, d, effect(k), kind, cache).value
                    for k in ("DE-SE", "IE-SE", "DE-IE-SE"))
        worst = max(worst, abs(parts - effect_estimate(fits, d, effect("TE-SE"), kind, cache).value))
    dt = time.perf_counter() - t
    ok = worst < 1e-10 and dt < 120
    acceptance(6, ok, f"max residual over 50 datasets = {worst:.2e}; {dt:.1f} s")
    assert ok


def test_criterion_07_consistency(acceptance):
    t = time.perf_counter()
    s = builtin_scm("C5")
    queries = [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]
    truth = {q: float(oracle_expectation(s, s.po_clause(q[0], q[1]), {"X": q[2]}).value) for q in queries}
    ses, misses, worst = {}, [], 0.0
    for n in (20000, 200000):
        d = sample_observational(s, n, seed=77)
        fits = fit_nuisances(d, make_fold_plan(d.x, 10, 0), LearnerConfig(kind="table"))
        for q in queries:
            est = po_estimate(fits, d, PoQuery(*q, "mean"), "onestep")
            ses[(n, q)] = est.se
            if n == 200000:
                z = abs(est.value - truth[q]) / est.se
                worst = max(worst, z)
                if z > 3:
                    misses.append(q)
    ratios = [ses[(20000, q)] / ses[(200000, q)] for q in queries]
    root10 = math.sqrt(10)
    ratio_ok = all(0.7 * root10 <= r <= 1.3 * root10 for r in ratios)
    dt = time.perf_counter() - t
    ok = not misses and ratio_ok and dt < 300
    acceptance(7, ok, f"max |est-oracle|/se = {worst:.2f} over 8 POs; SE ratios "
                      f"{min(ratios):.2f}-{max(ratios):.2f} (sqrt10 = {root10:.2f}); {dt:.1f} s")
    assert ok


def test_criterion_08_null_calibration(acceptance):
    t = time.perf_counter()
    table = run_grid(ExperimentGrid(scms=("M3",), sizes=(8000,), reps=100))
    summ = summarize(table, 0.05)
    dt = time.perf_counter() - t
    rates = {c["interaction"]: c["rejection_rate"] for c in summ.cells}
    errors = sum(c["errors"] for c in summ.cells)
    ok = all(0.02 <= rates[k] <= 0.10 for k in INTERACTIONS) and errors == 0 and dt < 1800
    acceptance(8, ok, "Type-I rates " + ", ".join(f"{k} {rates[k]:.2f}" for k in INTERACTIONS)
               + f"; errors {errors}; {dt / 60:.1f} min")
    assert ok


def test_criterion_09_power_trend(acceptance):
    t = time.perf_counter()
    table = run_grid(ExperimentGrid(scms=("M5",), sizes=(500, 8000), reps=20))
    summ = summarize(table, 0.05)
    dt = time.perf_counter() - t
    lo, hi = summ.rate("M5", 500, "TE-SE"), summ.rate("M5", 8000, "TE-SE")
    ok = hi > lo and dt < 900
    acceptance(9, ok, f"M5 TE-SE rejection {lo:.2f} at n=500 -> {hi:.2f} at n=8000; {dt / 60:.1f} min")
    assert ok


def test_criterion_10_pipeline(acceptance, tmp_path, capsys):
    jsonschema = pytest.importorskip("jsonschema")
    schema = report_schema()
    t = time.perf_counter()
    data, roles = bundled_path("census_like.csv"), bundled_path("census_like.roles")
    forms = {}
    for scale in ("mean", "log-risk", "log-odds"):
        out = tmp_path / f"{scale}.json"
        code = main(["decompose", "--data", str(data), "--roles", str(roles), "--scale", scale,
                     "--out", str(out)])
        assert code == 0, capsys.readouterr().out
        doc = json.loads(out.read_text())
        jsonschema.validate(doc, schema)
        assert doc["tv"]["n"] == 2000
        forms[scale] = doc["form"]
    dt = time.perf_counter() - t
    ok = dt < 120
    acceptance(10, ok, f"decompose on 2000 rows, schema-valid on all scales, forms {forms}; {dt:.1f} s")
    assert ok
