"""Ground-truth contrasts computed from a known SCM.

Exact mode enumerates the exogenous space. Explicit exogenous variables
must have finite support; the implicit uniform of a Bernoulli mechanism is
enumerated by cutting [0, 1] at the Bernoulli parameters of every world,
which keeps the worlds coupled exactly as a shared draw would. With
rational parameters the answer is a :class:`fractions.Fraction`.

Monte-Carlo mode uses one exogenous draw per unit for all clauses of the
contrast (common random numbers) and reports a delta-method standard error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping, Optional

import numpy as np

from .effects import EffectSpec
from .scm import (InterventionClause, ScmError, ScmSpec, _chunks, _clamp,
                  draw_exogenous, solve_worlds, world_list)

__all__ = ["Contrast", "OracleResult", "oracle_contrast", "oracle_expectation",
           "enumerate_worlds", "drr_irr"]

_ORDER_TAGS = {1: "first", 2: "second", 3: "third"}


def _freeze_event(event):
    return tuple(sorted((event or {}).items()))


@dataclass(frozen=True)
class Contrast:
    """Signed sum of conditional expectations of counterfactual outcomes.

    ``terms`` holds ``(coef, clause, event)`` triples; ``event`` is a tuple of
    ``(variable, value)`` equalities on the factual world. The value is
    ``sum(coef * h(E[P_clause | event]))`` with ``h`` the identity on the
    mean scale; on the log scales ``h`` is applied inside, i.e. the term is
    ``E[log P_clause | event]`` (or logit), where ``P_clause`` is the
    outcome probability with the outcome noise integrated out.
    """

    terms: tuple
    scale: str = "mean"
    order: str = "first"
    name: str = ""

    @classmethod
    def first_order(cls, c0, c1, e0=None, e1=None, scale="mean", name=""):
        """E[Y_{C1} | E1] - E[Y_{C0} | E0]."""
        e0, e1 = _freeze_event(e0), _freeze_event(e1)
        if e0 != e1 and c0 != c1:
            raise ValueError("a contrast must share either its clause or its conditioning event")
        return cls(((1, c1, e1), (-1, c0, e0)), scale, "first", name)

    @classmethod
    def from_effect(cls, spec: ScmSpec, eff: EffectSpec, event: Optional[Mapping] = None):
        """Contrast for a PO-algebra effect; ``event`` replaces marginal conditioning."""
        terms = []
        for (x_y, x_w, x_z), c in eff.coefs:
            ev = dict(event or {})
            if x_z is not None:
                ev[spec.x] = x_z
            terms.append((c, spec.po_clause(x_y, x_w), _freeze_event(ev)))
        return cls(tuple(terms), eff.scale, _ORDER_TAGS[eff.order], eff.name)

    @property
    def is_counterfactual(self) -> bool:
        return len({t[2] for t in self.terms}) == 1

    @property
    def is_factual(self) -> bool:
        return len({t[1] for t in self.terms}) == 1


@dataclass(frozen=True)
class OracleResult:
    value: object
    se: float = 0.0
    mode: str = "exact"
    n: int = 0

    def __float__(self):
        return float(self.value)


# -- exact enumeration ---------------------------------------------------------

def enumerate_worlds(spec: ScmSpec, worlds):
    """Yield ``(weight, states)`` over the joint exogenous space.

    ``states`` has one dict per world (see :func:`variata.scm.solve_worlds`).
    Weights are exact when all probabilities are rational.
    """
    for name, dist in spec.exogenous.items():
        if dist.support() is None:
            raise ScmError(f"exact mode needs finite-support noise; {name!r} is continuous")
    index = {c: i for i, c in enumerate(worlds)}
    variables = spec.variables

    def rec(step, weight, states):
        if step == len(variables):
            yield weight, states
            return
        v = variables[step]
        mech = spec.mechanisms[v]
        noise = [k for k in mech.expr.names if k in spec.exogenous]
        supports = [spec.exogenous[k].support() for k in noise]
        for combo in product(*supports):
            w = weight
            exo = {}
            for k, (val, p) in zip(noise, combo):
                w = w * p
                exo[k] = val
            if w == 0:
                continue
            raw = {}
            for i, c in enumerate(worlds):
                if v not in c.assignments:
                    env = {k: states[i][k] for k in mech.expr.names if k not in exo}
                    env.update(exo)
                    try:
                        raw[i] = mech.expr.evaluate(env, exact=True)
                    except Exception as exc:
                        raise ScmError(f"mechanism of {v!r} failed: {exc}") from None
            if mech.kind == "bernoulli":
                ps = {i: _clamp(p, v) for i, p in raw.items()}
                cuts = sorted(set([0, 1] + list(ps.values())))
                branches = []
                for lo, hi in zip(cuts[:-1], cuts[1:]):
                    if hi > lo:
                        branches.append((hi - lo, {i: (1 if p >= hi else 0) for i, p in ps.items()}))
                if not branches:
                    branches = [(1, {i: 0 for i in ps})]
            else:
                ps = None
                branches = [(1, raw)]
            for bw, vals in branches:
                new_states = []
                for i, c in enumerate(worlds):
                    s = dict(states[i])
                    a = c.assignments.get(v)
                    if a is None:
                        s[v] = vals[i]
                        if v == spec.y:
                            s["__p"] = ps[i] if ps is not None else vals[i]
                    elif isinstance(a, InterventionClause):
                        s[v] = new_states[index[a]][v]
                    else:
                        s[v] = a
                    new_states.append(s)
                yield from rec(step + 1, w * bw, new_states)

    yield from rec(0, Fraction(1), [dict() for _ in worlds])


def _transform(p, scale):
    if scale == "mean":
        return p
    if isinstance(p, np.ndarray):
        if scale == "log-risk":
            if (p <= 0).any():
                raise ScmError("degenerate risk: outcome probability 0 inside a log-risk contrast")
            return np.log(p)
        if ((p <= 0) | (p >= 1)).any():
            raise ScmError("degenerate odds: outcome probability in {0,1} inside a log-odds contrast")
        return np.log(p / (1 - p))
    p = float(p)
    if scale == "log-risk":
        if p <= 0:
            raise ScmError("degenerate risk: outcome probability 0 inside a log-risk contrast")
        return math.log(p)
    if p <= 0 or p >= 1:
        raise ScmError("degenerate odds: outcome probability in {0,1} inside a log-odds contrast")
    return math.log(p / (1 - p))


def _event_holds(state, event):
    ok = True
    for k, val in event:
        ok = ok & (state[k] == val)
    return ok


def _outcome(state, spec, scale):
    if scale == "mean":
        return state[spec.y]
    return _transform(state["__p"], scale)


def _exact(spec, contrast, route):
    if route == "separate":
        total = 0
        for t in contrast.terms:
            r = _exact(spec, Contrast((t,), contrast.scale, contrast.order), "joint")
            total = total + r
        return total
    for _, c, _ in contrast.terms:
        c.check(spec)
    worlds, index, ids = world_list([t[1] for t in contrast.terms])
    events = sorted({t[2] for t in contrast.terms})
    mass = {e: 0 for e in events}
    # basis-expansion form: per event, posterior-weighted unit-level combination
    integral = {e: 0 for e in events}
    for w, states in enumerate_worlds(spec, worlds):
        fact = states[0]
        for e in events:
            if _event_holds(fact, e):
                mass[e] += w
                unit = 0
                for (coef, _, ev), wid in zip(contrast.terms, ids):
                    if ev == e:
                        unit = unit + coef * _outcome(states[wid], spec, contrast.scale)
                integral[e] += w * unit
    total = 0
    for e in events:
        if mass[e] == 0:
            raise ScmError(f"empty conditioning event {dict(e)}")
        total = total + integral[e] / mass[e]
    return total


def _monte_carlo(spec, contrast, n, seed):
    if seed is None:
        raise ValueError("monte_carlo mode requires an explicit seed")
    for _, c, _ in contrast.terms:
        c.check(spec)
    worlds, index, ids = world_list([t[1] for t in contrast.terms])
    T = len(contrast.terms)
    coef = np.array([float(t[0]) for t in contrast.terms])
    S = np.zeros((T, T))
    A = np.zeros((T, T))
    C = np.zeros((T, T))
    for chunk, m in _chunks(n):
        exo = draw_exogenous(spec, m, seed, chunk)
        states = solve_worlds(spec, worlds, exo)
        ind = np.empty((T, m))
        f = np.empty((T, m))
        for t, ((_, _, ev), wid) in enumerate(zip(contrast.terms, ids)):
            ind[t] = np.broadcast_to(np.asarray(_event_holds(states[0], ev), dtype=float), (m,))
            f[t] = np.broadcast_to(np.asarray(_outcome(states[wid], spec, contrast.scale), dtype=float), (m,))
        fi = f * ind
        S += fi @ fi.T
        A += fi @ ind.T
        C += ind @ ind.T
    count = np.diag(C)
    if (count == 0).any():
        bad = contrast.terms[int(np.argmin(count))][2]
        raise ScmError(f"empty conditioning event {dict(bad)}")
    mean = np.diag(A) / count
    p = count / n
    value = float(coef @ mean)
    # E[psi^2] for psi = sum_t c_t 1_t (f_t - m_t) / p_t
    cov = (S - mean[None, :] * A - mean[:, None] * A.T + np.outer(mean, mean) * C) / n
    scale = coef / p
    var = float(scale @ cov @ scale)
    return value, math.sqrt(max(var, 0.0) / n)


def oracle_contrast(spec: ScmSpec, contrast: Contrast, mode: str = "exact",
                    n: int = 10**6, seed: Optional[int] = None, route: str = "joint") -> OracleResult:
    """Ground-truth value of ``contrast`` in ``spec``.

    Parameters
    ----------
    mode : {"exact", "monte_carlo"}
    n, seed : int
        Monte-Carlo size and (mandatory) seed.
    route : {"joint", "separate"}
        Exact mode only. ``joint`` sums posterior-weighted unit-level
        differences per conditioning event; ``separate`` evaluates every
        conditional expectation on its own. Both must agree.
    """
    if mode == "exact":
        return OracleResult(_exact(spec, contrast, route), 0.0, "exact", 0)
    if mode == "monte_carlo":
        value, se = _monte_carlo(spec, contrast, n, seed)
        return OracleResult(value, se, "monte_carlo", n)
    raise ValueError(f"unknown oracle mode {mode!r}")


def oracle_expectation(spec: ScmSpec, clause: InterventionClause, event=None, scale="mean",
                       mode="exact", n=10**6, seed=None) -> OracleResult:
    """E[h(P_clause) | event] as a one-term contrast."""
    c = Contrast(((1, clause, _freeze_event(event)),), scale, "first")
    return oracle_contrast(spec, c, mode, n, seed)


def drr_irr(spec: ScmSpec, mode="exact", n=10**6, seed=None):
    """Direct-indirect risk-ratio interaction on marginal probabilities.

    ``E[Y_{x1,W_{x0}}]/E[Y_{x0}] * E[Y_{x0,W_{x1}}]/E[Y_{x1}]``; equals 1
    when there is no interaction on the risk-ratio scale.
    """
    def ev(x_y, x_w):
        return oracle_expectation(spec, spec.po_clause(x_y, x_w), None, "mean", mode, n, seed).value

    return (ev(1, 0) / ev(0, 0)) * (ev(0, 1) / ev(1, 1))
