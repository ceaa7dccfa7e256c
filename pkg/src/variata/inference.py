"""Interaction tests, parsimonious TV decompositions and multiple testing.

Tests are two-sided Wald tests with a standard-normal reference. A
hypothesis is rejected when ``p < alpha`` (ties count as not rejected).
Benjamini-Hochberg flags use the adjusted value ``q <= alpha``, the usual
step-up rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .data import Dataset
from .effects import EffectSpec, PoQuery, effect, z_de_ie
from .estimators import EffectEstimate, effect_estimate, po_estimate
from .nuisance import NuisanceFits, fit_nuisances, make_fold_plan

__all__ = [
    "TestResult", "DecompositionReport", "InferenceError", "NotIdentifiableError",
    "interaction_test", "wald_test", "benjamini_hochberg",
    "run_alg1", "run_alg2", "granular_tests", "z_specific_de_ie",
    "unit_specific_de_ie", "FORMS", "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1

# parsimony branches: form id -> terms (in reporting order)
FORMS = {
    "3-term": ("DE", "IE", "SE"),
    "4-term-deie": ("DE", "IE", "DE-IE", "SE"),
    "4-term-tese": ("DE", "IE", "SE", "TE-SE"),
    "5-term": ("DE", "IE", "DE-IE", "SE", "TE-SE"),
}


class InferenceError(ValueError):
    pass


class NotIdentifiableError(InferenceError):
    pass


@dataclass
class TestResult:
    """Outcome of a Wald test of H0: effect = 0."""

    __test__ = False  # keep pytest from collecting this class

    hypothesis: str
    estimate: float
    se: float
    statistic: float
    p_value: float
    alpha: float
    rejected: bool
    q_value: float | None = None
    rejected_bh: bool | None = None
    n: int | None = None

    def to_dict(self) -> dict:
        out = {
            "hypothesis": self.hypothesis, "estimate": float(self.estimate), "se": float(self.se),
            "statistic": float(self.statistic), "p_value": float(self.p_value),
            "alpha": float(self.alpha), "rejected": bool(self.rejected),
        }
        if self.q_value is not None:
            out["q_value"] = float(self.q_value)
            out["rejected_bh"] = bool(self.rejected_bh)
        if self.n is not None:
            out["n"] = int(self.n)
        return out


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise InferenceError(f"alpha must lie in (0, 1), got {alpha}")


def wald_test(name: str, value: float, se: float, alpha: float = 0.05, n=None) -> TestResult:
    _check_alpha(alpha)
    if not (se > 0) or not math.isfinite(se):
        raise InferenceError(f"{name}: standard error is {se}; the data are degenerate for this test")
    z = value / se
    p = float(min(1.0, 2.0 * stats.norm.sf(abs(z))))
    return TestResult(name, float(value), float(se), float(z), p, alpha, p < alpha, n=n)


def interaction_test(est: EffectEstimate, alpha: float = 0.05) -> TestResult:
    """Wald test of H0: effect = 0 for an effect estimate."""
    return wald_test(est.label or est.name, est.value, est.se, alpha, est.n)


def benjamini_hochberg(p_values, alpha: float = 0.05):
    """Adjusted q-values and rejection flags (``q <= alpha``)."""
    _check_alpha(alpha)
    p = np.asarray(p_values, dtype=float)
    if p.size == 0:
        return p.copy(), np.zeros(0, dtype=bool)
    q = stats.false_discovery_control(p, method="bh")
    return q, q <= alpha


@dataclass
class DecompositionReport:
    """Parsimonious TV decomposition with its supporting tests.

    Attributes
    ----------
    form : str
        One of ``3-term``, ``4-term-deie``, ``4-term-tese``, ``5-term``.
    terms : list of EffectEstimate
        Terms of the selected form.
    full_terms : list of EffectEstimate
        All five terms of the full decomposition.
    additivity_residual : float
        |TV - sum(full_terms)|; zero up to rounding.
    omitted : float
        TV - sum(terms): the mass carried by interaction terms that were dropped.
    """

    scale: str
    form: str
    tv: EffectEstimate
    terms: list
    full_terms: list
    tests: dict
    additivity_residual: float
    omitted: float
    granular: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "decomposition",
            "scale": self.scale,
            "form": self.form,
            "tv": self.tv.to_dict(),
            "terms": [t.to_dict() for t in self.terms],
            "full_terms": [t.to_dict() for t in self.full_terms],
            "tests": {k: v.to_dict() for k, v in self.tests.items()},
            "granular_tests": [t.to_dict() for t in self.granular],
            "additivity_residual": float(self.additivity_residual),
            "omitted": float(self.omitted),
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
            "config": dict(self.config),
            "notes": list(self.notes),
        }


def _form_for(tese_rejected: bool, deie_rejected: bool) -> str:
    if not tese_rejected and not deie_rejected:
        return "3-term"
    if deie_rejected and not tese_rejected:
        return "4-term-deie"
    if tese_rejected and not deie_rejected:
        return "4-term-tese"
    return "5-term"


def _parsimony(fits, data, alpha, kind, scale, granular, config):
    cache = {}
    est = {k: effect_estimate(fits, data, effect(k, scale), kind, cache)
           for k in ("TV", "DE", "IE", "SE", "DE-IE", "TE-SE")}
    tests = {"TE-SE": interaction_test(est["TE-SE"], alpha),
             "DE-IE": interaction_test(est["DE-IE"], alpha)}
    form = _form_for(tests["TE-SE"].rejected, tests["DE-IE"].rejected)
    terms = [est[k] for k in FORMS[form]]
    full = [est[k] for k in FORMS["5-term"]]
    tv = est["TV"]
    resid = abs(tv.value - sum(t.value for t in full))
    omitted = tv.value - sum(t.value for t in terms)
    gran = granular_tests(fits, data, alpha, "benjamini_hochberg", kind, cache) if granular else []
    cfg = {"alpha": alpha, "estimator": kind, "scale": scale}
    cfg.update(fits.meta())
    cfg.pop("notes", None)
    if fits.plan is not None:
        cfg["seed"] = fits.plan.seed
    cfg.update(config or {})
    return DecompositionReport(scale, form, tv, terms, full, tests, resid, omitted,
                               gran, {}, cfg, list(fits.notes)), cache


def run_alg1(fits: NuisanceFits, data: Dataset, alpha: float = 0.05, kind: str = "onestep",
             granular: bool = True, config: dict | None = None) -> DecompositionReport:
    """Mean-scale TV decomposition with parsimony (total-spurious and direct-indirect tests)."""
    if fits.scale != "mean":
        raise InferenceError("run_alg1 needs mean-scale nuisances; use run_alg2 on the log scales")
    report, _ = _parsimony(fits, data, alpha, kind, "mean", granular, config)
    return report


def run_alg2(fits: NuisanceFits, data: Dataset, alpha: float = 0.05, kind: str = "onestep",
             granular: bool = True, config: dict | None = None) -> DecompositionReport:
    """Log-risk (or log-odds) TV decomposition with parsimony.

    Adds the risk-ratio diagnostic ``drr_irr`` = E[Y_{x1,W_{x0}}]/E[Y_{x0}] *
    E[Y_{x0,W_{x1}}]/E[Y_{x1}] computed from marginal mean-scale POs; it is
    reported, not tested.
    """
    if not data.binary_outcome:
        raise InferenceError("run_alg2 needs a binary outcome Y in {0,1}")
    if fits.scale not in ("log-risk", "log-odds"):
        raise InferenceError("run_alg2 needs nuisances fitted on the log-risk or log-odds scale")
    report, cache = _parsimony(fits, data, alpha, kind, fits.scale, granular, config)
    po = {k: po_estimate(fits, data, PoQuery(k[0], k[1], None, "mean"), kind).value
          for k in ((1, 0), (0, 0), (0, 1), (1, 1))}
    if po[(0, 0)] > 0 and po[(1, 1)] > 0:
        report.diagnostics["drr_irr"] = (po[(1, 0)] / po[(0, 0)]) * (po[(0, 1)] / po[(1, 1)])
    return report


def granular_tests(fits: NuisanceFits, data: Dataset, alpha: float = 0.05,
                   correction: str = "benjamini_hochberg", kind: str = "onestep",
                   cache: dict | None = None) -> list:
    """Tests of the five interaction effects, optionally BH-adjusted across the five."""
    if correction not in ("none", "benjamini_hochberg"):
        raise InferenceError(f"unknown correction {correction!r}")
    cache = {} if cache is None else cache
    out = []
    for k in ("TE-SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE"):
        out.append(interaction_test(effect_estimate(fits, data, effect(k, fits.scale), kind, cache), alpha))
    if correction == "benjamini_hochberg":
        q, flags = benjamini_hochberg([t.p_value for t in out], alpha)
        for t, qi, fi in zip(out, q, flags):
            t.q_value, t.rejected_bh = float(qi), bool(fi)
    return out


def _stratum_mask(data: Dataset, z_value, max_levels):
    if data.z.shape[1] == 0:
        raise InferenceError("z-specific tests need at least one Z column")
    for j in range(data.z.shape[1]):
        if len(np.unique(data.z[:, j])) > max_levels:
            raise InferenceError(
                f"z-specific tests are unsupported for continuous Z (column {data.z_names[j]!r})")
    zv = np.atleast_1d(np.asarray(z_value, dtype=float))
    if zv.shape[0] != data.z.shape[1]:
        raise InferenceError(f"z_value needs {data.z.shape[1]} entries, got {zv.shape[0]}")
    return np.all(data.z == zv[None, :], axis=1)


def z_specific_de_ie(fits: NuisanceFits, data: Dataset, z_value, alpha: float = 0.05,
                     min_stratum: int = 50, kind: str = "onestep") -> TestResult:
    """Stratum-level direct-indirect interaction test within Z = ``z_value``.

    Nuisances are refitted inside the stratum with the learner, fold count
    and seed of ``fits``. The effect is
    ``[PO(1,0) - PO(0,0)] - [PO(1,1) - PO(0,1)]`` on marginal POs in the
    stratum.
    """
    learner = fits.learner
    mask = _stratum_mask(data, z_value, learner.max_levels)
    sub = data.subset(np.flatnonzero(mask))
    for arm in (0, 1):
        count = int(np.sum(sub.x == arm))
        if count < min_stratum:
            raise InferenceError(
                f"stratum Z={z_value} has {count} rows with X={arm}; min_stratum={min_stratum}")
    sub = Dataset(sub.x, None, sub.w, sub.y, sub.x_name, sub.y_name, [], list(sub.w_names))
    K = fits.plan.K if fits.plan is not None else 10
    seed = fits.plan.seed if fits.plan is not None else 0
    sfits = fit_nuisances(sub, make_fold_plan(sub.x, K, seed), learner, fits.scale)
    est = effect_estimate(sfits, sub, z_de_ie(fits.scale), kind)
    res = wald_test(f"z-DE-IE(z={z_value})", est.value, est.se, alpha, sub.n)
    return res


def unit_specific_de_ie(*args, **kwargs):
    """Covariate- or unit-level DE-IE measures cannot be estimated from observational data."""
    raise NotIdentifiableError(
        "v-specific and u-specific DE-IE measures are not identifiable from observational data; "
        "use the z-specific test on a discrete confounder instead")
