"""Symbolic checks of structural interaction criteria.

The analyzer works on the *declared* additive term structure of the X, W
and Y mechanisms (the ``[terms]`` block of a model file). It never tries to
discover hidden additivity: if a mechanism is declared with a coupling term
the coupling is taken at face value, and a mis-declared shape yields a
wrong verdict.

Granular criteria (DE-SE, IE-SE, DE-IE-SE) are decided twice: by walking
the published decision trees and by evaluating the clause lists of the
definition. :func:`check_granular` uses the tree; :func:`granular_by_clauses`
exists so the two can be compared.

Reading of the IE-SE clause ``f_y = f1(X, Z) + W f2(X)``: any finite sum
of terms each linear in W (and free of Z) qualifies.

TE-SE with mediators present: the two-variable criterion (no X-Z term in
``f_y``) is applied to the reduced form of Y in (X, Z), i.e. after
substituting ``f_w``. An X-Z coupling arises from a direct X-Z term, an X-W
term with Z -> W, a Z-W term with X -> W, an X-Z term in ``f_w`` that
reaches Y, or a W-nonlinear term when both X and Z feed W.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .scm import ScmError, ScmSpec

__all__ = [
    "ShapeTerm", "MechanismShape", "StructuralVerdict",
    "check_te_se", "check_de_ie", "check_granular", "check_all",
    "granular_by_clauses", "CRITERIA",
]

CRITERIA = ("TE-SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE")
_LINKS = {"mean": "identity", "log-risk": "log", "log-odds": "logit"}
_LOG_NAMES = {
    "log-risk": {"TE-SE": "TLR-SLR", "DE-IE": "DLR-ILR", "DE-SE": "DLR-SLR",
                 "IE-SE": "ILR-SLR", "DE-IE-SE": "DLR-ILR-SLR"},
    "log-odds": {"TE-SE": "TLO-SLO", "DE-IE": "DLO-ILO", "DE-SE": "DLO-SLO",
                 "IE-SE": "ILO-SLO", "DE-IE-SE": "DLO-ILO-SLO"},
}


@dataclass(frozen=True)
class ShapeTerm:
    """An additive term: the roles it couples and whether it is linear in W."""

    roles: frozenset
    linear_in_w: bool = True

    def has(self, *roles) -> bool:
        return all(r in self.roles for r in roles)


def _term(roles, linear_in_w=True):
    return ShapeTerm(frozenset(roles), linear_in_w)


@dataclass(frozen=True)
class MechanismShape:
    """Role-level term structure of f_x, f_w (all mediators pooled) and f_y.

    Parameters
    ----------
    f_x, f_w, f_y : tuple of ShapeTerm
    link : {"identity", "log", "logit"}
        Scale on which ``f_y`` terms describe the outcome (binary Y).
    """

    f_x: tuple = ()
    f_w: tuple = ()
    f_y: tuple = ()
    link: str = "identity"

    @classmethod
    def from_terms(cls, f_x=(), f_w=(), f_y=(), link="identity", nonlinear_y=()):
        """Build from role strings, e.g. ``f_y=["X", "ZW", "WW"]``.

        A repeated ``W`` marks a term non-linear in W; indices listed in
        ``nonlinear_y`` are also flagged non-linear.
        """
        def conv(items, flags=()):
            out = []
            for i, s in enumerate(items):
                lin = s.count("W") <= 1 and i not in flags
                out.append(_term(set(s), lin))
            return tuple(out)

        return cls(conv(f_x), conv(f_w), conv(f_y, set(nonlinear_y)), link)

    @classmethod
    def from_spec(cls, spec: ScmSpec) -> "MechanismShape":
        """Aggregate the declared terms of ``spec`` by role."""
        def role_of(name):
            if name in spec.roles:
                return spec.roles[name]
            return "U"

        def convert(var):
            if var not in spec.terms:
                raise ScmError(f"model {spec.name!r} declares no terms for {var!r}")
            out = []
            for t in spec.terms[var]:
                roles = [role_of(n) for n in t.names]
                w_degree = sum(1 for r in roles if r == "W")
                out.append(_term(set(roles), linear_in_w=(w_degree <= 1 and not t.nonlinear)))
            # implicit noise of a Bernoulli mechanism
            if spec.mechanisms[var].kind == "bernoulli":
                out.append(_term({"U"}))
            return out

        f_w = []
        for w in spec.w_vars:
            f_w.extend(convert(w))
        return cls(tuple(convert(spec.x)), tuple(f_w), tuple(convert(spec.y)), spec.link)

    # argument sets and edge questions
    @staticmethod
    def _args(terms):
        out = set()
        for t in terms:
            out |= t.roles
        return out

    @property
    def z_to_x(self):
        return "Z" in self._args(self.f_x)

    @property
    def x_to_w(self):
        return "X" in self._args(self.f_w)

    @property
    def z_to_w(self):
        return "Z" in self._args(self.f_w)

    @property
    def w_to_y(self):
        return "W" in self._args(self.f_y)

    def y_has(self, *roles):
        return any(t.has(*roles) for t in self.f_y)

    def w_has(self, *roles):
        return any(t.has(*roles) for t in self.f_w)

    @property
    def y_nonlinear_w(self):
        return any("W" in t.roles and not t.linear_in_w for t in self.f_y)

    @property
    def y_xw_nonlinear(self):
        return any(t.has("X", "W") and not t.linear_in_w for t in self.f_y)


@dataclass(frozen=True)
class StructuralVerdict:
    criterion: str
    interaction: bool
    witness: str
    scale: str = "mean"

    @property
    def value(self) -> str:
        return "interaction" if self.interaction else "no-interaction"

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "verdict": self.value,
                "witness": self.witness, "scale": self.scale}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _v(name, flag, witness):
    return StructuralVerdict(name, flag, witness)


def check_te_se(shape: MechanismShape) -> StructuralVerdict:
    """Total-spurious criterion."""
    if not shape.z_to_x:
        return _v("TE-SE", False, "no back-door path")
    if shape.y_has("X", "Z"):
        return _v("TE-SE", True, "f_y has an X-Z term")
    if shape.z_to_w and shape.y_has("X", "W"):
        return _v("TE-SE", True, "f_y has an X-W term and Z->W")
    if shape.x_to_w and shape.y_has("Z", "W"):
        return _v("TE-SE", True, "f_y has a Z-W term and X->W")
    if shape.w_has("X", "Z") and shape.w_to_y:
        return _v("TE-SE", True, "f_w has an X-Z term and W->Y")
    if shape.x_to_w and shape.z_to_w and shape.y_nonlinear_w:
        return _v("TE-SE", True, "X and Z feed W and f_y non-linear in W")
    return _v("TE-SE", False, "additive f_y")


def check_de_ie(shape: MechanismShape) -> StructuralVerdict:
    """Direct-indirect criterion."""
    if not shape.x_to_w:
        return _v("DE-IE", False, "no indirect path")
    if not shape.y_has("X", "W"):
        return _v("DE-IE", False, "f_y additive in (X | W)")
    return _v("DE-IE", True, "f_y has an X-W term and X->W")


def _tree_de_se(s):
    if not s.z_to_x:
        return False, "no Z->X edge"
    if not s.z_to_w:
        if s.y_has("X", "Z"):
            return True, "no Z->W edge; f_y(X,Z) term present"
        return False, "no Z->W edge; no f_y(X,Z) term"
    if s.y_has("X", "W") or s.y_has("X", "Z"):
        return True, "Z->W; f_y(X,W) or f_y(X,Z) term present"
    return False, "Z->W; no f_y(X,W) or f_y(X,Z) term"


def _tree_ie_se(s):
    if not s.z_to_x:
        return False, "no Z->X edge"
    if not s.x_to_w:
        return False, "no X->W edge"
    if s.w_has("X", "Z"):
        if s.w_to_y:
            return True, "f_w(X,Z) term; W->Y edge"
        return False, "f_w(X,Z) term; no W->Y edge"
    if s.y_has("Z", "W"):
        return True, "no f_w(X,Z) term; f_y(Z,W) term present"
    if s.y_nonlinear_w:
        return True, "no f_w(X,Z) or f_y(Z,W) term; f_y non-linear in W"
    return False, "no f_w(X,Z) or f_y(Z,W) term; f_y linear in W"


def _tree_de_ie_se(s):
    if not s.z_to_x:
        return False, "no Z->X edge"
    if not s.x_to_w:
        return False, "no X->W edge"
    if s.w_has("X", "Z"):
        if s.y_has("X", "W"):
            return True, "f_w(X,Z) term; f_y(X,W) term present"
        return False, "f_w(X,Z) term; no f_y(X,W) term"
    if s.y_has("X", "Z", "W"):
        return True, "no f_w(X,Z) term; f_y(X,Z,W) term present"
    if s.y_xw_nonlinear:
        return True, "no f_w(X,Z) or f_y(X,Z,W) term; f_y(X,W) non-linear in W"
    return False, "no f_w(X,Z) or f_y(X,Z,W) term; f_y(X,W) linear in W"


_TREES = {"DE-SE": _tree_de_se, "IE-SE": _tree_ie_se, "DE-IE-SE": _tree_de_ie_se}


def check_granular(shape: MechanismShape, which: str) -> StructuralVerdict:
    """Walk the decision tree for DE-SE, IE-SE or DE-IE-SE."""
    try:
        tree = _TREES[which]
    except KeyError:
        raise ValueError(f"unknown granular criterion {which!r}") from None
    flag, witness = tree(shape)
    return _v(which, flag, witness)


def granular_by_clauses(shape: MechanismShape, which: str) -> StructuralVerdict:
    """Evaluate the clause list of the granular definition directly."""
    s = shape
    no_xz_w = not s.w_has("X", "Z")
    # Y terms touching W are all linear in W and Z-free
    y_w_linear_x_only = not any(
        "W" in t.roles and ("Z" in t.roles or not t.linear_in_w) for t in s.f_y)
    if which == "DE-SE":
        clauses = [
            ("(i) Z not an argument of f_x", not s.z_to_x),
            ("(ii) Z not in f_w and f_y = f1(X,W) + f2(Z,W)", not s.z_to_w and not s.y_has("X", "Z")),
            ("(iii) f_y = f1(X) + f2(Z,W)", not s.y_has("X", "Z") and not s.y_has("X", "W")),
        ]
    elif which == "IE-SE":
        clauses = [
            ("(i) Z not an argument of f_x", not s.z_to_x),
            ("(ii) X not an argument of f_w", not s.x_to_w),
            ("(iii) f_w additive in (X | Z) and f_y = f1(X,Z) + W f2(X)", no_xz_w and y_w_linear_x_only),
            ("(iv) W not an argument of f_y", not s.w_to_y),
        ]
    elif which == "DE-IE-SE":
        xw_linear = not any(t.has("X", "W") and not t.linear_in_w for t in s.f_y)
        clauses = [
            ("(i) Z not an argument of f_x", not s.z_to_x),
            ("(ii) X not an argument of f_w", not s.x_to_w),
            ("(iii) f_w additive in (X | Z) and f_y = f1(X,Z) + W f2(X) + f3(Z,W)",
             no_xz_w and not s.y_has("X", "Z", "W") and xw_linear),
            ("(iv) f_y = f1(X,Z) + f2(Z,W)", not s.y_has("X", "W")),
        ]
    else:
        raise ValueError(f"unknown granular criterion {which!r}")
    for label, holds in clauses:
        if holds:
            return _v(which, False, label)
    return _v(which, True, "no clause holds")


def check_all(shape: MechanismShape, scale: str = "mean") -> list:
    """The five verdicts on ``scale``; the shape's link must match the scale."""
    if scale not in _LINKS:
        raise ValueError(f"unknown scale {scale!r}")
    if shape.link != _LINKS[scale]:
        raise ValueError(
            f"scale {scale!r} needs terms declared on the {_LINKS[scale]!r} link, "
            f"but the shape uses {shape.link!r}")
    out = [check_te_se(shape), check_de_ie(shape)]
    out += [check_granular(shape, w) for w in ("DE-SE", "IE-SE", "DE-IE-SE")]
    if scale != "mean":
        names = _LOG_NAMES[scale]
        out = [StructuralVerdict(names[v.criterion], v.interaction, v.witness, scale) for v in out]
    return out
