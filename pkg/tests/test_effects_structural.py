import json

import pytest

from variata.builtin import builtin_scm
from variata.effects import (DECOMPOSITIONS, INTERACTIONS, check_telescoping, decomposition,
                             effect, z_de_ie)
from variata.oracle import Contrast, oracle_contrast
from variata.structural import (MechanismShape, check_all, check_granular, granular_by_clauses)

SYNTHETIC_SUMMARY = {  # TE-SE, DE-IE, DE-SE, IE-SE, DE-IE-SE
    "M1": "YYY..",
    "M2": "Y..Y.",
    "M3": ".....",
    "M4": "Y.Y..",
    "M5": "YYYYY",
}


@pytest.mark.parametrize("form", sorted(DECOMPOSITIONS))
def test_decompositions_telescope(form):
    assert check_telescoping(decomposition(form), effect("TV"))


def test_granular_split_of_total_spurious():
    assert check_telescoping([effect(k) for k in ("DE-SE", "IE-SE", "DE-IE-SE")], effect("TE-SE"))


def test_effect_names_and_labels():
    assert effect("DE").name == "x-DE"
    assert effect("DE", x0=1, x1=0).name == "x-DE[0->1]"
    assert effect("TE", cond=1).name == "x-TE|x1"
    assert effect("TV", "log-risk").label.startswith("TVLR")
    with pytest.raises(ValueError):
        effect("XX")


def test_z_de_ie_sign_convention():
    keys = dict(z_de_ie().coefs)
    assert keys[(1, 0, None)] == 1 and keys[(1, 1, None)] == -1


@pytest.mark.parametrize("name", sorted(SYNTHETIC_SUMMARY))
def test_synthetic_summary_rows(name):
    verdicts = check_all(MechanismShape.from_spec(builtin_scm(name)))
    assert "".join("Y" if v.interaction else "." for v in verdicts) == SYNTHETIC_SUMMARY[name]
    assert [v.criterion for v in verdicts] == list(INTERACTIONS)


FIXTURES = ["C1", "C2", "C3", "C4", "C5", "C5a", "C6", "C7", "C8", "C9", "C10", "C11", "C12", "ex7"]


@pytest.mark.parametrize("name", FIXTURES)
@pytest.mark.parametrize("which", ["DE-SE", "IE-SE", "DE-IE-SE"])
def test_tree_agrees_with_clause_list(name, which):
    shape = MechanismShape.from_spec(builtin_scm(name))
    assert check_granular(shape, which).interaction == granular_by_clauses(shape, which).interaction


@pytest.mark.parametrize("name", FIXTURES)
def test_admissibility(name):
    s = builtin_scm(name)
    for v in check_all(MechanismShape.from_spec(s)):
        if not v.interaction:
            assert oracle_contrast(s, Contrast.from_effect(s, effect(v.criterion))).value == 0, v


def test_verdict_json_shape():
    v = check_all(MechanismShape.from_spec(builtin_scm("C6")))[1]
    assert json.loads(v.to_json()) == {"criterion": "DE-IE", "verdict": "interaction",
                                       "witness": v.witness, "scale": "mean"}


def test_log_scale_needs_log_link():
    with pytest.raises(ValueError):
        check_all(MechanismShape.from_spec(builtin_scm("M1")), "log-risk")
    names = [v.criterion for v in check_all(MechanismShape.from_spec(builtin_scm("ex13")), "log-risk")]
    assert names[0] == "TLR-SLR" and names[1] == "DLR-ILR"


def test_shape_from_terms():
    shape = MechanismShape.from_terms(f_x=[("Z",)], f_w=[("X",)], f_y=[("X",), ("W",), ("X", "W")])
    assert check_all(shape)[1].interaction
    assert not check_all(shape)[0].interaction
