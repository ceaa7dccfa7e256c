"""Built-in models: the synthetic-study SCMs M1-M5 and small fixtures C1-C12.

Fixture map
-----------
C1   Z, X independent fair coins; Y = X + Z + XZ
C2   X ~ Bern(0.5 + 0.1 Z); Y = X + Z
C3   X, W independent fair coins; Y = X + W + XW
C4   W ~ Bern(0.5 + 0.1 X); Y = X + W
C5   X ~ Bern(0.5 + 0.2 Z); Y = X + Z + XZ          (alias C-te-se)
C5a  as C5 with X ~ Bern(0.5 + 0.1 Z); here P(Z=1|x1) = 6/11 and
     P(Z=1|x0) = 4/9, so the total-spurious value is 10/99
C6   W ~ Bern(0.5 + 0.1 X); Y = X + W + XW
C7   W = X + Z; Y = Z W                             (indirect-spurious, ZW term)
C8   W = X + Z; Y = W^2                             (indirect-spurious, nonlinear W)
C9   W = X Z;   Y = W                               (indirect-spurious, XZ coupling in W)
C10  W = X + Z; Y = X W^2                           (third order, nonlinear XW term)
C11  W = X + Z; Y = X Z W                           (third order, XZW term)
C12  W = X Z;   Y = X W                             (third order, XZ coupling in W)

In C7-C12, Z ~ Bern(0.5) and X ~ Bern(0.5 + 0.2 Z). Extra aliases:
``ex4`` (continuous direct-spurious example), ``ex7`` (stratum-level
direct-indirect example) and ``ex13`` (log-risk example, binary Y).
"""
from __future__ import annotations

from .scm import ScmError, ScmSpec, parse_scm

__all__ = ["builtin_scm", "BUILTIN_TEXT", "builtin_names"]

_PROPENSITY = "expit(0.3*Z1 - 0.2*Z2 + 0.5*Z3 + 0.2*Z1**2)"

_M_HEAD = """
[exogenous]
u1 = {d1}
u2 = {d2}
u3 = {d3}
e1 = normal(0, 1)
e2 = normal(0, 1)
e3 = normal(0, 1)
eta = normal(0, 1)

[variables]
Z1 : Z = u1
Z2 : Z = u2
Z3 : Z = u3
X : X ~ bernoulli({prop})
"""

_GAUSS = dict(d1="normal(0, 1)", d2="normal(0, 1)", d3="normal(0, 1)", prop=_PROPENSITY)

_W_LINEAR = """
W1 : W = 0.4*Z1 + 0.1*Z2 - 0.3*Z3 + 0.5*X + e1
W2 : W = 0.2*Z1 - 0.1*Z2 + 0.3*Z3 + 0.4*X + e2
W3 : W = 0.3*Z1 - 0.2*Z2 + 0.1*Z3 + 0.3*X + e3
"""

_W_SPARSE = """
W1 : W = 0.3*Z1**2 + e1
W2 : W = 0.5*Z2 + e2
W3 : W = 0.4*X + e3
"""

_TERMS_HEAD = """
[terms]
Z1 = u1
Z2 = u2
Z3 = u3
X = Z1 | Z2 | Z3 | Z1^2
"""

_TERMS_W_LINEAR = """
W1 = Z1 | Z2 | Z3 | X | e1
W2 = Z1 | Z2 | Z3 | X | e2
W3 = Z1 | Z2 | Z3 | X | e3
"""

_TERMS_W_SPARSE = """
W1 = Z1^2 | e1
W2 = Z2 | e2
W3 = X | e3
"""

BUILTIN_TEXT = {
    "M1": _M_HEAD.format(**_GAUSS) + _W_LINEAR + """
Y : Y = 0.5*W1 + 0.4*W2 + 0.3*W3 + 0.2*Z1 + 0.1*Z2 + 0.4*Z3 + 0.7*X + 0.2*X*W1 + eta
""" + _TERMS_HEAD + _TERMS_W_LINEAR + """
Y = W1 | W2 | W3 | Z1 | Z2 | Z3 | X | X*W1 | eta
""",
    "M2": _M_HEAD.format(d1="exponential(1)", d2="normal(5, 1)", d3="uniform(-2, 2)", prop=_PROPENSITY) + """
W1 : W = 0.3*Z1 - 0.5*Z2 + 0.2*Z3 + 0.2*X + e1
W2 : W = -0.1*Z1 + 0.3*Z2 + 0.1*Z3 + 0.1*X + e2
W3 : W = 0.2*Z1 + 0.2*Z2 - 0.3*Z3 + 0.4*X + e3
Y : Y = 0.4*W1 + 0.3*W2 + 0.2*W3 + 0.1*Z1 + 0.3*Z2 + 0.2*Z3 + 0.4*X + (0.1*W1 - 0.3*W2 - 0.3*W3)*(0.1*Z1 - 0.2*Z2 + 0.2*Z3) + eta
""" + _TERMS_HEAD + _TERMS_W_LINEAR + """
Y = W1 | W2 | W3 | Z1 | Z2 | Z3 | X | W1*Z1 | W1*Z2 | W1*Z3 | W2*Z1 | W2*Z2 | W2*Z3 | W3*Z1 | W3*Z2 | W3*Z3 | eta
""",
    "M3": _M_HEAD.format(**_GAUSS) + _W_SPARSE + """
Y : Y = 0.3*W1 + 0.2*W2 + 0.1*W3 + 0.2*Z1 + 0.1*Z2 + 0.3*Z3 + eta
""" + _TERMS_HEAD + _TERMS_W_SPARSE + """
Y = W1 | W2 | W3 | Z1 | Z2 | Z3 | eta
""",
    "M4": _M_HEAD.format(**_GAUSS) + _W_LINEAR + """
Y : Y = 0.5*W1 + 0.4*W2 + 0.3*W3 + 0.2*Z1 + 0.1*Z2 + 0.4*Z3 + 0.3*X*Z1 + eta
""" + _TERMS_HEAD + _TERMS_W_LINEAR + """
Y = W1 | W2 | W3 | Z1 | Z2 | Z3 | X*Z1 | eta
""",
    "M5": _M_HEAD.format(**_GAUSS) + _W_SPARSE + """
Y : Y = 0.4*W1 + 0.3*W2 + 0.2*W3 + 0.2*Z1 + 0.1*Z2 + 0.3*Z3 + 0.5*X*Z1*W3 - 0.4*Z2*W3 + X*Z3 + eta
""" + _TERMS_HEAD + _TERMS_W_SPARSE + """
Y = W1 | W2 | W3 | Z1 | Z2 | Z3 | X*Z1*W3 | Z2*W3 | X*Z3 | eta
""",
    "C1": """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5)
Y : Y = X + Z + X*Z
[terms]
Z =
X =
Y = X | Z | X*Z
""",
    "C2": """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5 + 0.1*Z)
Y : Y = X + Z
[terms]
Z =
X = Z
Y = X | Z
""",
    "C3": """
[variables]
X : X ~ bernoulli(0.5)
W : W ~ bernoulli(0.5)
Y : Y = X + W + X*W
[terms]
X =
W =
Y = X | W | X*W
""",
    "C4": """
[variables]
X : X ~ bernoulli(0.5)
W : W ~ bernoulli(0.5 + 0.1*X)
Y : Y = X + W
[terms]
X =
W = X
Y = X | W
""",
    "C5": """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5 + 0.2*Z)
Y : Y = X + Z + X*Z
[terms]
Z =
X = Z
Y = X | Z | X*Z
""",
    "C5a": """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5 + 0.1*Z)
Y : Y = X + Z + X*Z
[terms]
Z =
X = Z
Y = X | Z | X*Z
""",
    "C6": """
[variables]
X : X ~ bernoulli(0.5)
W : W ~ bernoulli(0.5 + 0.1*X)
Y : Y = X + W + X*W
[terms]
X =
W = X
Y = X | W | X*W
""",
}

_ZX = """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5 + 0.2*Z)
W : W = {w}
Y : Y = {y}
[terms]
Z =
X = Z
W = {wt}
Y = {yt}
"""

for _name, _w, _wt, _y, _yt in (
    ("C7", "X + Z", "X | Z", "Z*W", "Z*W"),
    ("C8", "X + Z", "X | Z", "W**2", "W^2"),
    ("C9", "X*Z", "X*Z", "W", "W"),
    ("C10", "X + Z", "X | Z", "X*W**2", "X*W^2"),
    ("C11", "X + Z", "X | Z", "X*Z*W", "X*Z*W"),
    ("C12", "X*Z", "X*Z", "X*W", "X*W"),
):
    BUILTIN_TEXT[_name] = _ZX.format(w=_w, wt=_wt, y=_y, yt=_yt)

BUILTIN_TEXT["ex4"] = """
[exogenous]
ez = normal(0, 1)
ew = normal(0, 1)
[variables]
Z : Z = ez
X : X ~ bernoulli(expit(Z))
W : W = ew + Z
Y : Y = W + X*W**2
[terms]
Z = ez
X = Z
W = ew | Z
Y = W | X*W^2
"""

BUILTIN_TEXT["ex7"] = """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5)
W : W = 1 - X
Y : Y = (2*Z - 1)*X*W
[terms]
Z =
X =
W = X
Y = Z*X*W | X*W
"""

BUILTIN_TEXT["ex13"] = """
[variables]
Z : Z ~ bernoulli(0.5)
X : X ~ bernoulli(0.5)
W : W ~ bernoulli(0.5 + 0.1*X)
Y : Y ~ bernoulli(exp(X + X*Z + W - 3))
[terms]
Z =
X =
W = X
Y = X | X*Z | W
link = log
"""

_ALIASES = {"C-te-se": "C5"}


def builtin_names() -> list:
    return list(BUILTIN_TEXT) + list(_ALIASES)


def builtin_scm(name: str) -> ScmSpec:
    """Return a built-in model by name (M1-M5, C1-C12, C-te-se, ex4, ex7, ex13)."""
    key = _ALIASES.get(name, name)
    if key not in BUILTIN_TEXT:
        raise ScmError(f"unknown builtin model {name!r}; available: {', '.join(builtin_names())}")
    return parse_scm(BUILTIN_TEXT[key], name=name)
