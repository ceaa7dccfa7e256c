"""Exact oracle values frozen from hand derivations on the small fixtures."""
from fractions import Fraction as F

import pytest

from variata.builtin import builtin_scm
from variata.effects import INTERACTIONS, effect
from variata.oracle import Contrast, drr_irr, oracle_contrast, oracle_expectation
from variata.scm import InterventionClause


def exact(name, kind, scale="mean"):
    s = builtin_scm(name)
    return oracle_contrast(s, Contrast.from_effect(s, effect(kind, scale))).value


# (fixture, effect, value); derivations in the comments
FROZEN = [
    ("C1", "TV", F(3, 2)),          # E[Y|x1] = 2, E[Y|x0] = 1/2
    ("C2", "SE", F(10, 99)),        # P(Z=1|x1) - P(Z=1|x0) = 6/11 - 4/9
    ("C2", "TV", F(109, 99)),
    ("C4", "IE", F(1, 10)),         # P(W=1|do x1) - P(W=1|do x0)
    ("C5", "TE-SE", F(5, 24)),      # P(Z=1|x1) - P(Z=1|x0) = 7/12 - 3/8
    ("C5a", "TE-SE", F(10, 99)),    # 17/11 - 13/9
    ("C5a", "SE", F(10, 99)),
    ("C6", "DE-IE", F(1, 10)),      # direct effect 1 + W, W shifts by 0.1
    ("C7", "IE-SE", F(5, 24)),
    ("C8", "TE-SE", F(5, 12)),
    ("C10", "DE-IE", F(7, 4)),
    ("C12", "DE-IE-SE", F(5, 24)),
]


@pytest.mark.parametrize("name,kind,value", FROZEN)
def test_frozen_exact_values(name, kind, value):
    got = exact(name, kind)
    assert isinstance(got, F)
    assert got == value


def test_c5_conditional_total_effects():
    s = builtin_scm("C5")
    te = lambda xc: oracle_contrast(s, Contrast.first_order(  # noqa: E731
        InterventionClause({"X": 0}), InterventionClause({"X": 1}), {"X": xc}, {"X": xc})).value
    assert te(1) == F(19, 12)
    assert te(0) == F(11, 8)


def test_routes_agree():
    s = builtin_scm("C11")
    for k in INTERACTIONS:
        c = Contrast.from_effect(s, effect(k))
        assert oracle_contrast(s, c, route="joint").value == oracle_contrast(s, c, route="separate").value


def test_monte_carlo_matches_exact():
    s = builtin_scm("C10")
    c = Contrast.from_effect(s, effect("DE-IE"))
    mc = oracle_contrast(s, c, "monte_carlo", n=200000, seed=5)
    assert abs(mc.value - 7 / 4) < 4 * mc.se
    again = oracle_contrast(s, c, "monte_carlo", n=200000, seed=5)
    assert again.value == mc.value


def test_monte_carlo_needs_seed():
    s = builtin_scm("C1")
    with pytest.raises(ValueError):
        oracle_contrast(s, Contrast.from_effect(s, effect("TV")), "monte_carlo", n=100)


def test_empty_event_rejected():
    s = builtin_scm("C1")
    with pytest.raises(ValueError, match="empty conditioning event"):
        oracle_expectation(s, InterventionClause({"X": 1}), {"Z": 7})


def test_contrast_kinds():
    s = builtin_scm("C5")
    se = Contrast.from_effect(s, effect("SE"))
    assert se.is_factual or se.is_counterfactual
    with pytest.raises(ValueError):
        Contrast.first_order(InterventionClause({"X": 0}), InterventionClause({"X": 1}), {"X": 0}, {"X": 1})


def test_log_risk_ex13_factorizes():
    s = builtin_scm("ex13")
    assert float(drr_irr(s)) == pytest.approx(1.0, abs=1e-12)
    assert float(exact("ex13", "DE-IE", "log-risk")) == pytest.approx(0.0, abs=1e-12)


def test_continuous_model_monte_carlo_only():
    s = builtin_scm("ex4")
    mc = oracle_contrast(s, Contrast.from_effect(s, effect("DE-SE")), "monte_carlo", n=200000, seed=1)
    assert mc.se > 0
