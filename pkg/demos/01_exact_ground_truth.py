"""Exact ground truth on the small discrete fixtures.

Every fixture has rational parameters, so the oracle enumerates the joint
exogenous space and returns Fractions. Structural verdicts are printed next
to the values: whenever a verdict says "no interaction" the measured
interaction is exactly zero.
"""
from variata import Contrast, MechanismShape, builtin_scm, check_all, effect, oracle_contrast
from variata.effects import INTERACTIONS

FIXTURES = ["C1", "C2", "C4", "C5", "C5a", "C6", "C7", "C8", "C9", "C10", "C11", "C12"]


def row(name):
    spec = builtin_scm(name)
    verdicts = {v.criterion: v.interaction for v in check_all(MechanismShape.from_spec(spec))}
    cells = []
    for k in ("TV",) + INTERACTIONS:
        val = oracle_contrast(spec, Contrast.from_effect(spec, effect(k))).value
        flag = "" if k == "TV" else ("*" if verdicts[k] else " ")
        cells.append(f"{str(val):>9}{flag}")
    return f"{name:<5}" + "".join(cells)


if __name__ == "__main__":
    print(f"{'':<5}" + "".join(f"{k:>10}" for k in ("TV",) + INTERACTIONS))
    for name in FIXTURES:
        print(row(name))
    print("\n* structural criterion says the interaction is present")
