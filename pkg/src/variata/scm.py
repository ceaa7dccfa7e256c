"""Structural causal models: specification, parsing, sampling and potential responses.

A model is written in a small declarative text format::

    # comments start with '#'
    [exogenous]
    uz = bernoulli(0.5)
    ey = normal(0, 1)

    [variables]
    Z : Z = uz
    X : X ~ bernoulli(0.5 + 0.2*Z)
    Y : Y = X + Z + X*Z + ey

    [terms]
    X = Z
    Y = X | Z | X*Z | ey
    link = identity

Each variable line is ``name : ROLE = expr`` (deterministic mechanism) or
``name : ROLE ~ bernoulli(expr)`` (Bernoulli mechanism). A Bernoulli
mechanism reads an implicit uniform noise ``U_<name>`` and returns
``1(U_<name> < p)``, so nested counterfactuals share that noise across
worlds. Exogenous distributions are ``bernoulli(p)``, ``normal(mean, sd)``,
``uniform(a, b)``, ``exponential(rate)`` and ``table(v1: p1, v2: p2, ...)``.
The optional ``[terms]`` block declares the additive term structure used by
the structural analyzer (see :mod:`variata.structural`).
"""
from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .data import Dataset
from .expr import Expr

__all__ = [
    "Bernoulli", "Normal", "Uniform", "Exponential", "Table",
    "Mechanism", "TermDecl", "ScmSpec", "ScmError",
    "InterventionClause", "ExogenousDraw",
    "parse_scm", "sample_observational", "sample_frame", "potential_response",
    "draw_exogenous", "solve_worlds", "CHUNK",
]

ROLES = ("Z", "X", "W", "Y")
_ROLE_RANK = {r: i for i, r in enumerate(ROLES)}
CHUNK = 1 << 16
_CLAMP_TOL = 1e-9


class ScmError(ValueError):
    """Invalid model specification or failed mechanism evaluation."""


def _num(text: str):
    """Parse a literal, keeping it rational when possible."""
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return float(Expr(text).evaluate({}))


# -- exogenous distributions --------------------------------------------------

@dataclass(frozen=True)
class Bernoulli:
    p: object

    def sample(self, rng, n):
        return (rng.random(n) < float(self.p)).astype(float)

    def support(self):
        p = self.p
        return [(0, 1 - p), (1, p)]


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    sd: float = 1.0

    def sample(self, rng, n):
        return rng.normal(float(self.mean), float(self.sd), n)

    def support(self):
        return None


@dataclass(frozen=True)
class Uniform:
    low: float = 0.0
    high: float = 1.0

    def sample(self, rng, n):
        return rng.uniform(float(self.low), float(self.high), n)

    def support(self):
        return None


@dataclass(frozen=True)
class Exponential:
    rate: float = 1.0

    def sample(self, rng, n):
        return rng.exponential(1.0 / float(self.rate), n)

    def support(self):
        return None


@dataclass(frozen=True)
class Table:
    values: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ScmError("table() needs matching, non-empty value/probability lists")
        if abs(float(sum(self.probs)) - 1.0) > 1e-12 or min(self.probs) < 0:
            raise ScmError("table() probabilities must be non-negative and sum to 1")

    def sample(self, rng, n):
        idx = rng.choice(len(self.values), size=n, p=[float(p) for p in self.probs])
        return np.asarray([float(v) for v in self.values])[idx]

    def support(self):
        return list(zip(self.values, self.probs))


def _parse_distribution(text: str):
    m = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", text)
    if not m:
        raise ScmError(f"cannot parse distribution {text!r}")
    kind, args = m.group(1).lower(), m.group(2)
    if kind == "table":
        values, probs = [], []
        for item in args.split(","):
            v, _, p = item.partition(":")
            values.append(_num(v))
            probs.append(_num(p))
        return Table(tuple(values), tuple(probs))
    parts = [_num(a) for a in args.split(",")] if args.strip() else []
    ctor = {"bernoulli": Bernoulli, "normal": Normal, "uniform": Uniform,
            "exponential": Exponential}.get(kind)
    if ctor is None:
        raise ScmError(f"unknown distribution {kind!r}")
    try:
        return ctor(*parts)
    except TypeError:
        raise ScmError(f"wrong number of arguments for {kind}()") from None


# -- mechanisms and declared terms --------------------------------------------

@dataclass(frozen=True)
class Mechanism:
    """``kind='value'`` returns ``expr``; ``kind='bernoulli'`` returns 1(U < expr)."""

    expr: Expr
    kind: str = "value"

    def __post_init__(self):
        if self.kind not in ("value", "bernoulli"):
            raise ScmError(f"unknown mechanism kind {self.kind!r}")


@dataclass(frozen=True)
class TermDecl:
    """One additive term of a mechanism: the names it couples."""

    names: tuple
    nonlinear: bool = False

    def degree(self, name):
        return sum(1 for n in self.names if n == name)


def _parse_terms(text: str):
    terms = []
    for chunk in text.split("|"):
        chunk = chunk.strip()
        if not chunk:
            continue
        nonlinear = False
        if chunk.endswith("[nonlinear]"):
            nonlinear = True
            chunk = chunk[: -len("[nonlinear]")].strip()
        names = []
        for tok in chunk.split("*"):
            tok = tok.strip()
            base, _, power = tok.partition("^")
            if not re.fullmatch(r"[A-Za-z_]\w*", base):
                raise ScmError(f"bad term token {tok!r}")
            names.extend([base] * (int(power) if power else 1))
        terms.append(TermDecl(tuple(names), nonlinear))
    return tuple(terms)


# -- the model ------------------------------------------------------------------

@dataclass(frozen=True)
class ScmSpec:
    """Executable Markovian SCM with role annotations.

    Parameters
    ----------
    variables : tuple of str
        Endogenous variables in topological order.
    roles : mapping
        Variable -> one of ``Z``, ``X``, ``W``, ``Y``.
    mechanisms : mapping
        Variable -> :class:`Mechanism`.
    exogenous : mapping
        Exogenous name -> distribution.
    terms : mapping, optional
        Variable -> tuple of :class:`TermDecl` (declared additive structure).
    link : str
        Scale on which the Y terms describe the outcome: identity, log or logit.
    """

    variables: tuple
    roles: Mapping
    mechanisms: Mapping
    exogenous: Mapping
    terms: Mapping = field(default_factory=dict)
    link: str = "identity"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        for attr in ("roles", "mechanisms", "exogenous", "terms"):
            object.__setattr__(self, attr, MappingProxyType(dict(getattr(self, attr))))
        self._validate()

    # validation keeps the model Markovian and wired Z -> X -> W -> Y
    def _validate(self):
        seen = set()
        used_exo = {}
        if set(self.roles) != set(self.variables) or set(self.mechanisms) != set(self.variables):
            raise ScmError("every variable needs exactly one role and one mechanism")
        for v in self.variables:
            role = self.roles[v]
            if role not in ROLES:
                raise ScmError(f"variable {v!r} has unknown role {role!r}")
            for parent in self.mechanisms[v].expr.names:
                if parent in self.exogenous:
                    if parent in used_exo:
                        raise ScmError(
                            f"exogenous {parent!r} is shared by {used_exo[parent]!r} and {v!r}; "
                            "correlated noise (non-Markovian models) is not supported")
                    used_exo[parent] = v
                elif parent in seen:
                    prole = self.roles[parent]
                    if _ROLE_RANK[prole] > _ROLE_RANK[role] or prole == role in ("X", "Y"):
                        raise ScmError(f"{v!r} ({role}) cannot depend on {parent!r} ({prole})")
                else:
                    raise ScmError(f"mechanism of {v!r} references unknown or later name {parent!r}")
            seen.add(v)
            if v in self.exogenous:
                raise ScmError(f"{v!r} is both endogenous and exogenous")
        counts = {r: sum(1 for v in self.variables if self.roles[v] == r) for r in ROLES}
        if counts["X"] != 1 or counts["Y"] != 1:
            raise ScmError("a model needs exactly one X and one Y variable")
        if self.link not in ("identity", "log", "logit"):
            raise ScmError(f"unknown link {self.link!r}")
        for v, decl in self.terms.items():
            if v not in self.mechanisms:
                raise ScmError(f"terms declared for unknown variable {v!r}")
            declared = {n for t in decl for n in t.names}
            reads = set(self.mechanisms[v].expr.names)
            if declared != reads:
                raise ScmError(
                    f"terms of {v!r} cover {sorted(declared)} but the mechanism reads {sorted(reads)}")

    # convenience accessors
    def _by_role(self, role):
        return [v for v in self.variables if self.roles[v] == role]

    @property
    def x(self) -> str:
        return self._by_role("X")[0]

    @property
    def y(self) -> str:
        return self._by_role("Y")[0]

    @property
    def z_vars(self) -> list:
        return self._by_role("Z")

    @property
    def w_vars(self) -> list:
        return self._by_role("W")

    def parents(self, v) -> list:
        return [p for p in self.mechanisms[v].expr.names if p in self.roles]

    def noise_names(self, v) -> list:
        names = [p for p in self.mechanisms[v].expr.names if p in self.exogenous]
        if self.mechanisms[v].kind == "bernoulli":
            names.append(f"U_{v}")
        return names

    @property
    def finite(self) -> bool:
        """True when every explicit exogenous variable has finite support."""
        return all(d.support() is not None for d in self.exogenous.values())

    def po_clause(self, x_y, x_w=None) -> "InterventionClause":
        """Clause for Y_{x_y, W_{x_w}}; ``x_w=None`` means W follows x_y."""
        if x_w is None or x_w == x_y or not self.w_vars:
            return InterventionClause({self.x: x_y})
        inner = InterventionClause({self.x: x_w})
        assign = {self.x: x_y}
        assign.update({w: inner for w in self.w_vars})
        return InterventionClause(assign)


# -- interventions --------------------------------------------------------------

class InterventionClause:
    """Assignments of constants or nested sub-interventions.

    A nested value ``{W: InterventionClause({X: 0})}`` sets W to the value it
    would take under ``do(X=0)`` with the same exogenous draw.
    """

    __slots__ = ("assignments", "_key")

    def __init__(self, assignments: Mapping | None = None):
        items = dict(assignments or {})
        for k, v in items.items():
            if isinstance(v, InterventionClause):
                if v.depth() > 1:
                    raise ScmError("nesting depth above 2 is not supported")
        self.assignments = MappingProxyType(items)
        self._key = tuple(sorted(
            (k, v._key if isinstance(v, InterventionClause) else ("const", v)) for k, v in items.items()))

    def depth(self) -> int:
        inner = [v.depth() for v in self.assignments.values() if isinstance(v, InterventionClause)]
        return 1 + (max(inner) if inner else 0)

    def nested(self):
        return [v for v in self.assignments.values() if isinstance(v, InterventionClause)]

    def check(self, spec: ScmSpec):
        for k, v in self.assignments.items():
            if k not in spec.roles:
                raise ScmError(f"clause assigns unknown variable {k!r}")
            if isinstance(v, InterventionClause):
                if spec.roles[k] != "W":
                    raise ScmError(f"nested values are only allowed for W variables, not {k!r}")
                v.check(spec)

    def __eq__(self, other):
        return isinstance(other, InterventionClause) and other._key == self._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = [f"{k}={v!r}" for k, v in self.assignments.items()]
        return "do(" + ", ".join(parts) + ")"


@dataclass
class ExogenousDraw:
    """Realized exogenous values (scalars or arrays) and their weight."""

    values: dict
    weight: object = 1


# -- parsing ------------------------------------------------------------------

def parse_scm(text: str, name: str = "") -> ScmSpec:
    """Parse the declarative model format into an :class:`ScmSpec`."""
    section = None
    exogenous, variables, roles, mechanisms, terms = {}, [], {}, {}, {}
    link = "identity"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("exogenous", "variables", "terms"):
                raise ScmError(f"line {lineno}: unknown section [{section}]")
            continue
        try:
            if section == "exogenous":
                key, _, val = line.partition("=")
                exogenous[key.strip()] = _parse_distribution(val)
            elif section == "variables":
                m = re.fullmatch(r"(\w+)\s*:\s*([ZXWY])\s*(=|~)\s*(.+)", line)
                if not m:
                    raise ScmError("expected 'name : ROLE = expr' or 'name : ROLE ~ bernoulli(expr)'")
                v, role, op, body = m.groups()
                if op == "~":
                    bm = re.fullmatch(r"bernoulli\s*\((.*)\)", body.strip())
                    if not bm:
                        raise ScmError("only bernoulli(...) mechanisms may use '~'")
                    mech = Mechanism(Expr(bm.group(1)), "bernoulli")
                else:
                    mech = Mechanism(Expr(body), "value")
                variables.append(v)
                roles[v] = role
                mechanisms[v] = mech
            elif section == "terms":
                key, _, val = line.partition("=")
                key = key.strip()
                if key == "link":
                    link = val.strip()
                else:
                    terms[key] = _parse_terms(val)
            else:
                raise ScmError("content outside of a section")
        except ScmError as exc:
            raise ScmError(f"line {lineno}: {exc}") from None
        except ValueError as exc:
            raise ScmError(f"line {lineno}: {exc}") from None
    return ScmSpec(tuple(variables), roles, mechanisms, exogenous, terms, link, name)


# -- evaluation -------------------------------------------------------------------

def _clamp(p, var):
    if isinstance(p, np.ndarray):
        if np.isnan(p).any():
            raise ScmError(f"Bernoulli parameter of {var!r} is NaN")
        lo, hi = p.min(), p.max()
        if lo < -_CLAMP_TOL or hi > 1 + _CLAMP_TOL:
            warnings.warn(f"Bernoulli parameter of {var!r} outside [0,1]; clamped", RuntimeWarning)
        return np.clip(p, 0.0, 1.0)
    if p != p:
        raise ScmError(f"Bernoulli parameter of {var!r} is NaN")
    if p < -_CLAMP_TOL or p > 1 + _CLAMP_TOL:
        warnings.warn(f"Bernoulli parameter of {var!r} outside [0,1]; clamped", RuntimeWarning)
    return min(max(p, 0), 1)


def world_list(clauses):
    """Flatten clauses (and nested sub-clauses) into unique worlds.

    World 0 is always the factual (empty) clause.
    """
    worlds = [InterventionClause()]
    index = {worlds[0]: 0}

    def add(c):
        for sub in c.nested():
            add(sub)
        if c not in index:
            index[c] = len(worlds)
            worlds.append(c)
        return index[c]

    ids = [add(c) for c in clauses]
    return worlds, index, ids


def _mech_eval(spec, v, env, exact):
    try:
        return spec.mechanisms[v].expr.evaluate(env, exact=exact)
    except ScmError:
        raise
    except Exception as exc:
        raise ScmError(f"mechanism of {v!r} failed: {exc}") from None


def solve_worlds(spec: ScmSpec, worlds, exo: Mapping, exact: bool = False):
    """Solve every world under one shared exogenous draw (scalar or vector).

    Returns a list of dicts, one per world, mapping variable -> value. For a
    Bernoulli-mechanism outcome the key ``"__p"`` holds its parameter.
    """
    index = {c: i for i, c in enumerate(worlds)}
    states = [dict() for _ in worlds]
    for v in spec.variables:
        mech = spec.mechanisms[v]
        for i, c in enumerate(worlds):
            a = c.assignments.get(v)
            if a is None:
                env = dict(states[i])
                env.update({k: exo[k] for k in mech.expr.names if k in spec.exogenous})
                val = _mech_eval(spec, v, env, exact)
                if mech.kind == "bernoulli":
                    p = _clamp(val, v)
                    u = exo[f"U_{v}"]
                    if isinstance(p, np.ndarray) or isinstance(u, np.ndarray):
                        val = (u < p).astype(float)
                    else:
                        val = 1 if u < p else 0
                    if v == spec.y:
                        states[i]["__p"] = p
                elif v == spec.y:
                    states[i]["__p"] = val
            elif isinstance(a, InterventionClause):
                val = states[index[a]][v]
            else:
                val = a
            states[i][v] = val
    return states


def potential_response(spec: ScmSpec, clause: InterventionClause, draw: ExogenousDraw) -> dict:
    """Values of all endogenous variables in the submodel ``clause`` at ``draw``."""
    clause.check(spec)
    worlds, index, ids = world_list([clause])
    states = solve_worlds(spec, worlds, draw.values, exact=False)
    out = dict(states[ids[0]])
    out.pop("__p", None)
    return out


def _exogenous_names(spec):
    names = list(spec.exogenous)
    names += [f"U_{v}" for v in spec.variables if spec.mechanisms[v].kind == "bernoulli"]
    return names


def draw_exogenous(spec: ScmSpec, n: int, seed: int, chunk: int = 0) -> dict:
    """Exogenous draws for one chunk, from a stream keyed on (seed, chunk)."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(chunk)]))
    out = {}
    for name in _exogenous_names(spec):
        dist = spec.exogenous.get(name)
        out[name] = dist.sample(rng, n) if dist is not None else rng.random(n)
    return out


def _chunks(n):
    c = 0
    while n > 0:
        m = min(CHUNK, n)
        yield c, m
        n -= m
        c += 1


def sample_frame(spec: ScmSpec, n: int, seed: int):
    """Observational sample as a pandas DataFrame with every endogenous column."""
    import pandas as pd

    if n < 1:
        raise ScmError("n must be at least 1")
    parts = []
    for c, m in _chunks(n):
        exo = draw_exogenous(spec, m, seed, c)
        state = solve_worlds(spec, [InterventionClause()], exo)[0]
        parts.append({v: np.broadcast_to(np.asarray(state[v], dtype=float), (m,)).copy()
                      for v in spec.variables})
    cols = {v: np.concatenate([p[v] for p in parts]) for v in spec.variables}
    return pd.DataFrame(cols)


def sample_observational(spec: ScmSpec, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. rows from the observational distribution."""
    frame = sample_frame(spec, n, seed)
    z, w = spec.z_vars, spec.w_vars
    return Dataset(
        frame[spec.x].to_numpy().astype(int),
        frame[z].to_numpy() if z else None,
        frame[w].to_numpy() if w else None,
        frame[spec.y].to_numpy(),
        x_name=spec.x, y_name=spec.y, z_names=list(z), w_names=list(w),
    )
