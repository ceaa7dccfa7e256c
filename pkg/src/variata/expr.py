"""Restricted arithmetic expressions used by SCM mechanisms.

Grammar (a subset of Python expression syntax)::

    expr     := expr ("+" | "-" | "*" | "/" | "**") expr
              | "-" expr | "(" expr ")"
              | NUMBER | NAME
              | FUNC "(" expr ")"
              | "ind" "(" expr CMP expr ")"
    FUNC     := exp | log | sqrt | abs | expit | logit
    CMP      := "<" | "<=" | ">" | ">=" | "==" | "!="

Names resolve against parent variables and exogenous draws. Expressions
evaluate elementwise on numpy arrays, or on scalars. In exact mode every
numeric literal becomes a :class:`fractions.Fraction` so that rational
models produce rational answers.
"""
from __future__ import annotations

import ast
import math
from fractions import Fraction
from typing import Any, Mapping

import numpy as np

__all__ = ["Expr", "ExpressionError"]


class ExpressionError(ValueError):
    """Raised for malformed or disallowed expressions."""


def _is_array(v) -> bool:
    return isinstance(v, np.ndarray)


def _exp(v):
    return np.exp(v) if _is_array(v) else math.exp(float(v))


def _log(v):
    if _is_array(v):
        return np.log(v)
    return math.log(float(v))


def _sqrt(v):
    return np.sqrt(v) if _is_array(v) else math.sqrt(float(v))


def _abs(v):
    return np.abs(v) if _is_array(v) else abs(v)


def _expit(v):
    if _is_array(v):
        return 1.0 / (1.0 + np.exp(-v))
    return 1.0 / (1.0 + math.exp(-float(v)))


def _logit(v):
    if _is_array(v):
        return np.log(v / (1.0 - v))
    v = float(v)
    return math.log(v / (1.0 - v))


def _ind(v):
    # comparisons already produce bool (scalar) or bool arrays
    if _is_array(v):
        return v.astype(float)
    return 1 if v else 0


_FUNCS = {
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
    "abs": _abs,
    "expit": _expit,
    "logit": _logit,
    "ind": _ind,
}

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_CMPOPS = (ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.Eq, ast.NotEq)


class _ExactLiterals(ast.NodeTransformer):
    def visit_Constant(self, node):
        return ast.copy_location(
            ast.Call(
                func=ast.Name(id="__F", ctx=ast.Load()),
                args=[ast.Constant(value=repr(node.value))],
                keywords=[],
            ),
            node,
        )


class Expr:
    """A validated, compiled mechanism expression.

    Parameters
    ----------
    source : str
        Expression text, e.g. ``"0.5*X + W1 + expit(Z1)"``.

    Attributes
    ----------
    names : frozenset of str
        Variable and exogenous names the expression reads.
    """

    def __init__(self, source: str):
        self.source = source.strip()
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse expression {source!r}: {exc.msg}") from None
        names = set()
        self._validate(tree.body, names, in_ind=False)
        self.names = frozenset(names)
        self._code = compile(tree, "<mechanism>", "eval")
        exact_tree = ast.fix_missing_locations(_ExactLiterals().visit(ast.parse(self.source, mode="eval")))
        self._exact_code = compile(exact_tree, "<mechanism>", "eval")

    def _validate(self, node, names, in_ind):
        if isinstance(node, ast.BinOp):
            if not isinstance(node.op, _BINOPS):
                raise ExpressionError(f"operator {type(node.op).__name__} not allowed in {self.source!r}")
            self._validate(node.left, names, in_ind)
            self._validate(node.right, names, in_ind)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ExpressionError(f"unary operator not allowed in {self.source!r}")
            self._validate(node.operand, names, in_ind)
        elif isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ExpressionError(f"only numeric literals allowed in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id in _FUNCS or node.id.startswith("__"):
                raise ExpressionError(f"reserved name {node.id!r} in {self.source!r}")
            names.add(node.id)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
                raise ExpressionError(f"unknown function in {self.source!r}; allowed: {sorted(_FUNCS)}")
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"{node.func.id}() takes exactly one argument")
            arg = node.args[0]
            if node.func.id == "ind":
                if not isinstance(arg, ast.Compare):
                    raise ExpressionError("ind() expects a comparison, e.g. ind(Z > 0)")
                self._validate(arg, names, in_ind=True)
            else:
                self._validate(arg, names, in_ind)
        elif isinstance(node, ast.Compare):
            if not in_ind:
                raise ExpressionError("comparisons are only allowed inside ind()")
            if len(node.ops) != 1 or not isinstance(node.ops[0], _CMPOPS):
                raise ExpressionError("ind() takes a single comparison")
            self._validate(node.left, names, in_ind)
            self._validate(node.comparators[0], names, in_ind)
        else:
            raise ExpressionError(f"syntax {type(node).__name__} not allowed in {self.source!r}")

    def evaluate(self, env: Mapping[str, Any], exact: bool = False):
        """Evaluate against ``env`` (name -> scalar or array)."""
        missing = self.names.difference(env)
        if missing:
            raise ExpressionError(f"unbound names {sorted(missing)} in {self.source!r}")
        scope = dict(_FUNCS)
        scope.update({k: env[k] for k in self.names})
        if exact:
            scope["__F"] = Fraction
            return eval(self._exact_code, {"__builtins__": {}}, scope)
        return eval(self._code, {"__builtins__": {}}, scope)

    def __repr__(self):
        return f"Expr({self.source!r})"

    def __eq__(self, other):
        return isinstance(other, Expr) and other.source == self.source

    def __hash__(self):
        return hash(self.source)
