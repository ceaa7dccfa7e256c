"""Effect algebra: named effects as signed sums of potential-outcome functionals.

``PO(x_y, x_w, x_z) = E[Y_{x_y, W_{x_w}} | X = x_z]``. With ``x_z=None`` the
functional is marginal, ``E[Y_{x_y, W_{x_w}}]``, which is what stratum-level
(z-specific) contrasts need. Every effect below is built from transitions
``a -> b`` of the treatment so that reversed transitions (``x1 -> x0``) used
in the symmetry identities come for free.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

__all__ = [
    "SCALES", "PoQuery", "EffectSpec", "effect", "decomposition",
    "DECOMPOSITIONS", "INTERACTIONS", "check_telescoping", "z_de_ie",
]

SCALES = ("mean", "log-risk", "log-odds")

# labels used on the log scales
_LOG_LABELS = {
    "log-risk": {"TV": "TVLR", "TE": "TLR", "DE": "DLR", "IE": "ILR", "SE": "SLR"},
    "log-odds": {"TV": "TVLO", "TE": "TLO", "DE": "DLO", "IE": "ILO", "SE": "SLO"},
}


def _check_scale(scale):
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; expected one of {SCALES}")


@dataclass(frozen=True, order=True)
class PoQuery:
    """The functional E[Y_{x_y, W_{x_w}} | X = x_z] on a given scale."""

    x_y: int
    x_w: int
    x_z: Optional[int]
    scale: str = "mean"

    def __post_init__(self):
        _check_scale(self.scale)
        if self.x_y not in (0, 1) or self.x_w not in (0, 1) or self.x_z not in (0, 1, None):
            raise ValueError(f"invalid PoQuery indices {(self.x_y, self.x_w, self.x_z)}")

    @property
    def key(self):
        return (self.x_y, self.x_w, self.x_z)


@dataclass(frozen=True)
class EffectSpec:
    """A named effect: coefficient per PoQuery.

    ``coefs`` is a tuple of ``((x_y, x_w, x_z), coef)`` pairs with coef in {-1, +1}.
    """

    name: str
    coefs: tuple
    scale: str = "mean"
    order: int = 1

    def __post_init__(self):
        _check_scale(self.scale)
        for _, c in self.coefs:
            if c not in (-1, 1):
                raise ValueError(f"{self.name}: coefficients must be +1 or -1, got {c}")

    def queries(self):
        return [PoQuery(*k, scale=self.scale) for k, _ in self.coefs]

    def as_dict(self) -> dict:
        return dict(self.coefs)

    @property
    def label(self) -> str:
        """Display name, with the log-scale vocabulary (x-DLR-ILR, ...) where relevant."""
        if self.scale == "mean":
            return self.name
        table = _LOG_LABELS[self.scale]
        out = self.name
        for k in sorted(table, key=len, reverse=True):
            out = out.replace(f"-{k}", f"-{table[k]}").replace(f"{k}-", f"{table[k]}-")
        if out == "TV":
            out = table["TV"]
        return out


def _combine(*parts):
    acc = {}
    for sign, key in parts:
        acc[key] = acc.get(key, 0) + sign
    return tuple(sorted(((k, c) for k, c in acc.items() if c != 0),
                        key=lambda kc: tuple(-1 if v is None else v for v in kc[0])))


def _po(a, b, c):
    return (a, b, c)


# second-order building blocks; each returns a list of (sign, key)
def _diff(plus, minus):
    return [(s, k) for s, k in plus] + [(-s, k) for s, k in minus]


def _effect_terms(kind, a, b, cond):
    """Signed PO keys for transition a -> b; ``cond`` is the conditioning x."""
    P = _po
    if kind == "TV":
        return [(1, P(b, b, b)), (-1, P(a, a, a))]
    if kind == "TE":
        return [(1, P(b, b, cond)), (-1, P(a, a, cond))]
    if kind == "DE":
        return [(1, P(b, a, cond)), (-1, P(a, a, cond))]
    if kind == "IE":
        return [(1, P(a, b, cond)), (-1, P(a, a, cond))]
    if kind == "SE":
        return [(1, P(a, a, b)), (-1, P(a, a, a))]
    if kind == "DE-IE":
        return _diff([(1, P(b, b, cond)), (-1, P(a, b, cond))],
                     [(1, P(b, a, cond)), (-1, P(a, a, cond))])
    if kind == "TE-SE":
        return _diff([(1, P(b, b, b)), (-1, P(a, a, b))],
                     [(1, P(b, b, a)), (-1, P(a, a, a))])
    if kind == "DE-SE":
        return _diff([(1, P(b, a, b)), (-1, P(a, a, b))],
                     [(1, P(b, a, a)), (-1, P(a, a, a))])
    if kind == "IE-SE":
        return _diff([(1, P(a, b, b)), (-1, P(a, a, b))],
                     [(1, P(a, b, a)), (-1, P(a, a, a))])
    if kind == "DE-IE-SE":
        return _diff(_effect_terms("DE-IE", a, b, b), _effect_terms("DE-IE", a, b, a))
    raise ValueError(f"unknown effect {kind!r}")


_ORDER = {"TV": 1, "TE": 1, "DE": 1, "IE": 1, "SE": 1,
          "DE-IE": 2, "TE-SE": 2, "DE-SE": 2, "IE-SE": 2, "DE-IE-SE": 3}

INTERACTIONS = ("TE-SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE")


def effect(kind: str, scale: str = "mean", x0: int = 0, x1: int = 1, cond: int | None = None) -> EffectSpec:
    """Build a named effect.

    Parameters
    ----------
    kind : str
        One of TV, TE, DE, IE, SE, DE-IE, TE-SE, DE-SE, IE-SE, DE-IE-SE.
        A leading ``x-`` is accepted and ignored.
    x0, x1 : int
        Transition of the treatment (baseline ``x0`` to ``x1``).
    cond : int, optional
        Conditioning value for TE/DE/IE/DE-IE; defaults to ``x0``.
    """
    kind = kind[2:] if kind.startswith("x-") else kind
    if kind not in _ORDER:
        raise ValueError(f"unknown effect {kind!r}")
    if {x0, x1} != {0, 1}:
        raise ValueError("x0 and x1 must be 0 and 1 in some order")
    cond = x0 if cond is None else cond
    name = "TV" if kind == "TV" else f"x-{kind}"
    if (x0, x1) != (0, 1):
        name += f"[{x1}->{x0}]"
    if kind in ("TE", "DE", "IE", "DE-IE") and cond != x0:
        name += f"|x{cond}"
    return EffectSpec(name, _combine(*_effect_terms(kind, x0, x1, cond)), scale, _ORDER[kind])


def z_de_ie(scale: str = "mean") -> EffectSpec:
    """Stratum-level DE-IE over marginal POs (to be evaluated within Z = z).

    Sign convention: [PO(1,0) - PO(0,0)] - [PO(1,1) - PO(0,1)], i.e. the
    direct effect with mediators held at their x0 value minus the direct
    effect with mediators at their x1 value.
    """
    P = lambda a, b: (a, b, None)  # noqa: E731
    terms = [(1, P(1, 0)), (-1, P(0, 0)), (-1, P(1, 1)), (1, P(0, 1))]
    return EffectSpec("z-DE-IE", _combine(*terms), scale, 2)


DECOMPOSITIONS = {
    # TV = TE(.|x0) + SE + TE-SE
    "te-se": ("TE", "SE", "TE-SE"),
    # TV = DE + IE + DE-IE + SE + TE-SE
    "de-ie-se": ("DE", "IE", "DE-IE", "SE", "TE-SE"),
    # TV = DE + IE + SE + DE-IE + DE-SE + IE-SE + DE-IE-SE
    "granular": ("DE", "IE", "SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE"),
}


def decomposition(form: str, scale: str = "mean") -> list:
    """Effect specs of a TV decomposition (see ``DECOMPOSITIONS``)."""
    try:
        kinds = DECOMPOSITIONS[form]
    except KeyError:
        raise ValueError(f"unknown decomposition {form!r}") from None
    return [effect(k, scale) for k in kinds]


def check_telescoping(effects, target) -> bool:
    """True when the coefficient maps of ``effects`` sum exactly to ``target``."""
    acc = {}
    for e in effects:
        for k, c in e.coefs:
            acc[k] = acc.get(k, 0) + c
    acc = {k: c for k, c in acc.items() if c}
    return acc == target.as_dict()
