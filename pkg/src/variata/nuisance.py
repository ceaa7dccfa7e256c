"""Cross-fitted nuisance functions.

For every row the following out-of-fold predictions are produced:

* ``mu0``, ``mu1``: E[Y | X=x, Z, W] at x = 0 and 1,
* ``e``: P(X=1 | Z),
* ``g``: P(X=1 | Z, W),
* ``nu[(scale, x_y, x_w)]``: E[h(mu(x_y, Z, W)) | X=x_w, Z] with ``h`` the
  scale transform (identity, log or logit).

The nested mean is fitted by regressing in-fold predictions of
``h(mu(x_y, ., .))`` on Z among training rows with X = x_w.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .learners import LearnerConfig, make_learner

__all__ = ["FoldPlan", "NuisanceFits", "make_fold_plan", "fit_nuisances",
           "transform", "transform_deriv", "clip_mu", "NuisanceError"]


class NuisanceError(ValueError):
    pass


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of rows to K folds."""

    K: int
    assignment: np.ndarray
    seed: int = 0

    def __post_init__(self):
        if self.K < 2:
            raise NuisanceError("cross-fitting needs K >= 2 folds")

    def test_rows(self, k):
        return np.flatnonzero(self.assignment == k)

    def train_rows(self, k):
        return np.flatnonzero(self.assignment != k)


def make_fold_plan(x, K: int = 10, seed: int = 0, stratify: bool = True) -> FoldPlan:
    """Random fold plan, stratified on the treatment by default.

    Rows are shuffled within each treatment arm and dealt round-robin, so
    fold sizes differ by at most one and each arm is spread evenly.
    """
    x = np.asarray(x)
    n = x.shape[0]
    if K < 2:
        raise NuisanceError("cross-fitting needs K >= 2 folds")
    if n < K:
        raise NuisanceError(f"{n} rows cannot fill {K} folds")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x5F01D]))
    if stratify:
        order = np.concatenate([rng.permutation(np.flatnonzero(x == v)) for v in (0, 1)])
    else:
        order = rng.permutation(n)
    assignment = np.empty(n, dtype=np.int32)
    assignment[order] = np.arange(n) % K
    return FoldPlan(K, assignment, seed)


def clip_mu(mu, scale, delta):
    if scale == "log-risk":
        return np.clip(mu, delta, 1.0)
    if scale == "log-odds":
        return np.clip(mu, delta, 1.0 - delta)
    return mu


def transform(mu, scale):
    if scale == "mean":
        return mu
    if scale == "log-risk":
        return np.log(mu)
    return np.log(mu / (1 - mu))


def transform_deriv(mu, scale):
    if scale == "mean":
        return np.ones_like(mu)
    if scale == "log-risk":
        return 1.0 / mu
    return 1.0 / (mu * (1 - mu))


@dataclass
class NuisanceFits:
    """Out-of-fold nuisance predictions aligned with the dataset rows.

    ``mu0``/``mu1`` are clipped for the fitted scale (to [δ, 1] on log-risk,
    [δ, 1-δ] on log-odds); ``e`` and ``g`` are clipped to [ε, 1-ε].
    """

    scale: str
    mu0: np.ndarray
    mu1: np.ndarray
    e: np.ndarray
    g: np.ndarray
    nu: dict
    plan: FoldPlan | None = None
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    notes: list = field(default_factory=list)

    def mu(self, x):
        return self.mu1 if x == 1 else self.mu0

    def prop_z(self, x):
        return self.e if x == 1 else 1.0 - self.e

    def prop_zw(self, x):
        return self.g if x == 1 else 1.0 - self.g

    @property
    def n(self):
        return self.mu0.shape[0]

    def meta(self) -> dict:
        return {
            "scale": self.scale,
            "folds": self.plan.K if self.plan is not None else None,
            "learner": self.learner.kind,
            "clip_e": self.learner.clip_e,
            "clip_mu": self.learner.clip_mu,
            "notes": list(self.notes),
        }


def _check_scale(data, scale):
    if scale not in ("mean", "log-risk", "log-odds"):
        raise NuisanceError(f"unknown scale {scale!r}")
    if scale != "mean" and not data.binary_outcome:
        raise NuisanceError(f"scale {scale!r} needs a binary outcome Y in {{0,1}}")


def fit_nuisances(data: Dataset, plan: FoldPlan, learner: LearnerConfig | None = None,
                  scale: str = "mean") -> NuisanceFits:
    """Cross-fit mu, e, g and the nested means on ``scale`` (and always on the mean scale)."""
    learner = learner or LearnerConfig()
    _check_scale(data, scale)
    if plan.assignment.shape[0] != data.n:
        raise NuisanceError("fold plan and data have different row counts")
    n = data.n
    scales = ["mean"] if scale == "mean" else ["mean", scale]
    eps, delta = learner.clip_e, learner.clip_mu
    mu0 = np.empty(n)
    mu1 = np.empty(n)
    e = np.empty(n)
    g = np.empty(n)
    nu = {(s, a, b): np.empty(n) for s in scales for a in (0, 1) for b in (0, 1)}
    x = data.x.astype(float)
    zw = np.hstack([data.z, data.w])
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for k in range(plan.K):
            tr = plan.train_rows(k)
            te = plan.test_rows(k)
            if len(te) == 0:
                continue
            xt = data.x[tr]
            if xt.min() == xt.max():
                raise NuisanceError(
                    f"fold {k}: training split has a single treatment class; use stratified folds")
            model = make_learner(learner)
            mu_m = model.fit(np.column_stack([x[tr], data.z[tr], data.w[tr]]), data.y[tr], "squared")
            for xv, out in ((0, mu0), (1, mu1)):
                feats = np.column_stack([np.full(len(te), float(xv)), data.z[te], data.w[te]])
                out[te] = mu_m.predict(feats)
            e_m = model.fit(data.z[tr], x[tr], "logistic")
            e[te] = e_m.predict(data.z[te])
            g_m = model.fit(zw[tr], x[tr], "logistic")
            g[te] = g_m.predict(zw[te])
            # nested means from in-fold predictions of mu(x_y, Z, W)
            for x_y in (0, 1):
                feats = np.column_stack([np.full(len(tr), float(x_y)), data.z[tr], data.w[tr]])
                mu_tr = mu_m.predict(feats)
                for s in scales:
                    target = transform(clip_mu(mu_tr, s, delta), s)
                    for x_w in (0, 1):
                        rows = xt == x_w
                        nu_m = model.fit(data.z[tr][rows], target[rows], "squared")
                        nu[(s, x_y, x_w)][te] = nu_m.predict(data.z[te])
    for w in caught:
        msg = str(w.message)
        if msg not in notes:
            notes.append(msg)
    # the table learner returns probabilities already; boosted logistic too
    e = np.clip(e, eps, 1 - eps)
    g = np.clip(g, eps, 1 - eps)
    for name, arr in (("e", e), ("g", g)):
        if np.all((arr == eps) | (arr == 1 - eps)):
            notes.append(f"degenerate propensity: every {name} prediction sits at a clipping bound")
    mu0 = clip_mu(mu0, scale, delta)
    mu1 = clip_mu(mu1, scale, delta)
    return NuisanceFits(scale, mu0, mu1, e, g, nu, plan, learner, notes)
