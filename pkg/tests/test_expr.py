from fractions import Fraction

import numpy as np
import pytest

from variata.expr import Expr, ExpressionError


def test_names_and_numeric_evaluation():
    e = Expr("0.5*X + expit(Z) - ind(W > 1)")
    assert e.names == {"X", "Z", "W"}
    out = e.evaluate({"X": np.array([0.0, 2.0]), "Z": np.array([0.0, 0.0]), "W": np.array([2.0, 0.0])})
    np.testing.assert_allclose(out, [-0.5, 1.5])


def test_exact_mode_keeps_fractions():
    e = Expr("0.5 + 0.2*Z")
    assert e.evaluate({"Z": 1}, exact=True) == Fraction(7, 10)


@pytest.mark.parametrize("src", ["__import__('os')", "X.real", "[X]", "X if Z else W",
                                 "open('f')", "lambda: 1", "X < Z", "ind(X < Z < W)"])
def test_disallowed_syntax_rejected(src):
    with pytest.raises(ExpressionError):
        Expr(src)


def test_power_and_functions():
    e = Expr("X**2 + log(exp(Z)) + sqrt(abs(W)) + logit(0.5)")
    assert e.evaluate({"X": 3.0, "Z": 1.0, "W": -4.0}) == pytest.approx(12.0)
