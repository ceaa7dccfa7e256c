import numpy as np
import pytest

from variata.builtin import builtin_scm
from variata.data import Dataset
from variata.learners import BoostedTrees, LearnerConfig, TableLearner
from variata.nuisance import NuisanceError, fit_nuisances, make_fold_plan
from variata.scm import sample_observational


def test_table_learner_is_cell_mean():
    X = np.array([[0, 0], [0, 0], [0, 1], [1, 1], [1, 1], [1, 1]], dtype=float)
    y = np.array([1.0, 3.0, 5.0, 0.0, 3.0, 6.0])
    m = TableLearner().fit(X, y)
    np.testing.assert_allclose(m.predict(X), [2, 2, 5, 3, 3, 3])


def test_table_learner_unseen_cell_warns():
    m = TableLearner().fit(np.array([[0.0], [1.0]]), np.array([1.0, 3.0]))
    with pytest.warns(RuntimeWarning, match="unseen"):
        assert m.predict(np.array([[2.0]]))[0] == 2.0


def test_table_learner_rejects_continuous():
    X = np.random.default_rng(0).normal(size=(500, 1))
    with pytest.raises(ValueError, match="stumps"):
        TableLearner(LearnerConfig(max_levels=64)).fit(X, X[:, 0])


def test_boosting_fits_interaction():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(4000, 3))
    y = X[:, 0] + X[:, 0] * X[:, 1] + 0.1 * rng.normal(size=4000)
    m = BoostedTrees(LearnerConfig(kind="stumps")).fit(X, y)
    r2 = 1 - np.mean((m.predict(X) - y) ** 2) / np.var(y)
    assert r2 > 0.8


def test_boosting_logistic_outputs_probabilities():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(3000, 2))
    y = rng.binomial(1, 1 / (1 + np.exp(-2 * X[:, 0]))).astype(float)
    p = BoostedTrees(LearnerConfig(kind="stumps")).fit(X, y, "logistic").predict(X)
    assert p.min() > 0 and p.max() < 1
    assert np.corrcoef(p, X[:, 0])[0, 1] > 0.9


def test_learner_config_validation():
    with pytest.raises(ValueError):
        LearnerConfig(kind="forest")
    assert LearnerConfig().to_dict()["clip_e"] == 0.01


def test_fold_plan_is_stratified_and_balanced():
    x = np.array([0] * 53 + [1] * 47)
    plan = make_fold_plan(x, K=5, seed=3)
    sizes = np.bincount(plan.assignment)
    assert sizes.max() - sizes.min() <= 1
    for k in range(5):
        assert abs(x[plan.test_rows(k)].mean() - 0.47) < 0.06
    np.testing.assert_array_equal(plan.assignment, make_fold_plan(x, K=5, seed=3).assignment)
    with pytest.raises(NuisanceError):
        make_fold_plan(x, K=1)


def test_saturated_nuisances_match_cell_means():
    d = sample_observational(builtin_scm("C6"), 5000, seed=4)
    fits = fit_nuisances(d, make_fold_plan(d.x, 2, 0), LearnerConfig())
    plan = fits.plan
    for k in range(2):
        tr, te = plan.train_rows(k), plan.test_rows(k)
        for xv, mu in ((0, fits.mu0), (1, fits.mu1)):
            for wv in (0.0, 1.0):
                cell = tr[(d.x[tr] == xv) & (d.w[tr, 0] == wv)]
                rows = te[d.w[te, 0] == wv]
                np.testing.assert_allclose(mu[rows], d.y[cell].mean())


def test_propensities_respect_clipping():
    d = sample_observational(builtin_scm("C2"), 2000, seed=1)
    cfg = LearnerConfig(clip_e=0.2)
    fits = fit_nuisances(d, make_fold_plan(d.x, 5, 0), cfg)
    for arr in (fits.e, fits.g):
        assert arr.min() >= 0.2 and arr.max() <= 0.8


def test_single_class_fold_rejected():
    d = Dataset(np.array([0] * 10 + [1] * 2), None, None, np.arange(12.0))
    plan = make_fold_plan(d.x, K=2, seed=0, stratify=False)
    plan.assignment[:] = [0] * 10 + [1] * 2
    with pytest.raises(NuisanceError, match="stratified"):
        fit_nuisances(d, plan)


def test_degenerate_propensity_noted():
    d = sample_observational(builtin_scm("ex7"), 2000, seed=1)
    fits = fit_nuisances(d, make_fold_plan(d.x, 5, 0))
    assert any("degenerate propensity" in n for n in fits.notes)


def test_log_scale_needs_binary_outcome():
    d = sample_observational(builtin_scm("C6"), 500, seed=1)
    with pytest.raises(NuisanceError, match="binary"):
        fit_nuisances(d, make_fold_plan(d.x, 5, 0), scale="log-risk")
