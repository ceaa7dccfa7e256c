"""Regenerate the bundled census-like dataset (2000 rows, binary outcome).

Columns: sex (X), age and race (Z, race categorical), education and
employed (W), high_income (Y). Written to src/variata/data/.
"""
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import expit

OUT = Path(__file__).resolve().parents[1] / "src" / "variata" / "data"


def make(n=2000, seed=20240501):
    rng = np.random.default_rng(seed)
    age = rng.integers(18, 66, n)
    race = rng.choice(["black", "other", "white"], n, p=[0.15, 0.15, 0.70])
    r = (race == "white").astype(float)
    sex = rng.binomial(1, expit(0.2 - 0.01 * (age - 40) + 0.1 * r))
    educ = np.clip(np.round(2 + 0.02 * (age - 40) + 0.3 * r - 0.2 * sex + rng.normal(0, 1, n)), 0, 4)
    employed = rng.binomial(1, expit(1.0 - 0.5 * sex + 0.3 * educ - 0.02 * (age - 40)))
    lin = -2.2 + 0.5 * sex + 0.35 * educ + 0.8 * employed + 0.015 * (age - 40) + 0.2 * r + 0.2 * sex * educ
    y = rng.binomial(1, expit(lin))
    return pd.DataFrame({"sex": sex, "age": age, "race": race, "education": educ.astype(int),
                         "employed": employed, "high_income": y})


ROLES = """[roles]
X = sex
Z = age, race
W = education, employed
Y = high_income

[categorical]
columns = race

[settings]
learner = stumps
folds = 5
"""

if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    make().to_csv(OUT / "census_like.csv", index=False)
    (OUT / "census_like.roles").write_text(ROLES)
    print(f"wrote {OUT / 'census_like.csv'}")
