"""Plug-in and one-step estimators of PO(x_y, x_w, x_z) and of named effects.

The one-step estimator averages the uncentered influence expression::

    A_y * (Y - mu(x_y)) * h'(mu(x_y))  +  A_w * (h(mu(x_y)) - nu)  +  A_z * nu

with, for a conditional functional (x_z given),

    A_z = 1(X=x_z) / P(x_z)
    A_w = 1(X=x_w) / P(x_z) * P(x_z|Z) / P(x_w|Z)
    A_y = 1(X=x_y) / P(x_z) * P(x_z|Z) / P(x_w|Z) * P(x_w|Z,W) / P(x_y|Z,W)

and, for a marginal functional (x_z=None), ``A_z = 1``, ``A_w = 1(X=x_w) /
P(x_w|Z)`` and ``A_y = 1(X=x_y) / P(x_w|Z) * P(x_w|Z,W) / P(x_y|Z,W)``.
``h`` is the scale transform (identity, log, logit). ``P(x_z)`` is the raw
empirical share of X = x_z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .effects import EffectSpec, PoQuery
from .nuisance import NuisanceFits, transform, transform_deriv

__all__ = ["PoEstimate", "EffectEstimate", "po_plugin", "po_onestep", "effect_estimate",
           "EstimationError", "po_estimate"]

KINDS = ("plugin", "onestep")


class EstimationError(ValueError):
    pass


@dataclass
class PoEstimate:
    """Estimate of one PO functional with its centered influence values."""

    query: PoQuery
    value: float
    influence: np.ndarray
    kind: str

    @property
    def n(self) -> int:
        return self.influence.shape[0]

    @property
    def se(self) -> float:
        return float(np.std(self.influence) / math.sqrt(self.n))


@dataclass
class EffectEstimate:
    """A named effect: value, per-row influence, SE and 95% interval."""

    name: str
    scale: str
    estimator: str
    value: float
    influence: np.ndarray = field(repr=False)
    label: str = ""

    @property
    def n(self) -> int:
        return self.influence.shape[0]

    @property
    def se(self) -> float:
        return float(np.std(self.influence) / math.sqrt(self.n))

    @property
    def ci95(self) -> tuple:
        half = 1.959963984540054 * self.se
        return (self.value - half, self.value + half)

    def to_dict(self) -> dict:
        lo, hi = self.ci95
        return {"name": self.label or self.name, "scale": self.scale, "estimator": self.estimator,
                "value": float(self.value), "se": self.se, "ci95": [float(lo), float(hi)],
                "n": int(self.n)}


def _check(fits: NuisanceFits, data: Dataset, q: PoQuery):
    if fits.n != data.n:
        raise EstimationError("nuisance fits and data are not aligned")
    if (q.scale, q.x_y, q.x_w) not in fits.nu:
        raise EstimationError(f"nuisances were fitted for scale {fits.scale!r}, not {q.scale!r}")
    if q.x_z is not None and not np.any(data.x == q.x_z):
        raise EstimationError(f"no rows with X={q.x_z}")


def _weights(fits, data, q):
    x = data.x
    ind_y = (x == q.x_y).astype(float)
    ind_w = (x == q.x_w).astype(float)
    g_ratio = fits.prop_zw(q.x_w) / fits.prop_zw(q.x_y)
    if q.x_z is None:
        a_z = np.ones(data.n)
        e_ratio = 1.0 / fits.prop_z(q.x_w)
    else:
        p_xz = float(np.mean(x == q.x_z))
        a_z = (x == q.x_z) / p_xz
        e_ratio = fits.prop_z(q.x_z) / fits.prop_z(q.x_w) / p_xz
    a_w = ind_w * e_ratio
    a_y = ind_y * e_ratio * g_ratio
    return a_y, a_w, a_z


def _uncentered(fits, data, q):
    mu = fits.mu(q.x_y)
    nu = fits.nu[(q.scale, q.x_y, q.x_w)]
    a_y, a_w, a_z = _weights(fits, data, q)
    resid = (data.y - mu) * transform_deriv(mu, q.scale)
    return a_y * resid + a_w * (transform(mu, q.scale) - nu) + a_z * nu, a_z


def po_onestep(fits: NuisanceFits, data: Dataset, q: PoQuery) -> PoEstimate:
    """One-step (influence-function corrected) estimate of ``q``."""
    _check(fits, data, q)
    phi, a_z = _uncentered(fits, data, q)
    value = float(np.mean(phi))
    return PoEstimate(q, value, phi - a_z * value, "onestep")


def po_plugin(fits: NuisanceFits, data: Dataset, q: PoQuery) -> PoEstimate:
    """Plug-in estimate of ``q``; its SE reuses the one-step influence values."""
    _check(fits, data, q)
    x = data.x
    rows = slice(None) if q.x_z is None else (x == q.x_z)
    if q.x_z is not None and q.x_y == q.x_w == q.x_z:
        # consistency collapses the nested mean to the factual regression
        if q.scale == "mean":
            value = float(np.mean(data.y[rows]))
        else:
            value = float(np.mean(transform(fits.mu(q.x_y)[rows], q.scale)))
    else:
        value = float(np.mean(fits.nu[(q.scale, q.x_y, q.x_w)][rows]))
    phi, a_z = _uncentered(fits, data, q)
    return PoEstimate(q, value, phi - a_z * float(np.mean(phi)), "plugin")


def po_estimate(fits, data, q, kind="onestep") -> PoEstimate:
    if kind == "onestep":
        return po_onestep(fits, data, q)
    if kind == "plugin":
        return po_plugin(fits, data, q)
    raise EstimationError(f"unknown estimator {kind!r}; use 'plugin' or 'onestep'")


def effect_estimate(fits: NuisanceFits, data: Dataset, spec: EffectSpec, kind: str = "onestep",
                    cache: dict | None = None) -> EffectEstimate:
    """Linear combination of PO estimates with matching influence values.

    ``cache`` (optional dict) memoizes PO estimates across calls that share
    ``fits`` and ``data``.
    """
    value = 0.0
    infl = np.zeros(data.n)
    for q, c in zip(spec.queries(), (c for _, c in spec.coefs)):
        key = (kind, q)
        if cache is not None and key in cache:
            est = cache[key]
        else:
            est = po_estimate(fits, data, q, kind)
            if cache is not None:
                cache[key] = est
        value += c * est.value
        infl += c * est.influence
    return EffectEstimate(spec.name, spec.scale, kind, value, infl, spec.label)
