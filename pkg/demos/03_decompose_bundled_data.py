"""Decompose the bundled census-like dataset on all three scales.

Equivalent CLI call::

    variata decompose --data census_like.csv --roles census_like.roles --scale log-risk
"""
from variata import fit_nuisances, ingest_csv, make_fold_plan, run_alg1, run_alg2
from variata.io import bundled_path
from variata.learners import LearnerConfig

if __name__ == "__main__":
    data = ingest_csv(bundled_path("census_like.csv"), bundled_path("census_like.roles"))
    print(f"n={data.n}  X={data.x_name}  Z={data.z_names}  W={data.w_names}  codebook={data.codebook}")
    learner = LearnerConfig(kind="stumps")
    plan = make_fold_plan(data.x, K=5, seed=0)
    for scale in ("mean", "log-risk", "log-odds"):
        fits = fit_nuisances(data, plan, learner, scale)
        rep = (run_alg1 if scale == "mean" else run_alg2)(fits, data)
        print(f"\n[{scale}] form={rep.form}  TV={rep.tv.value:+.4f}")
        for t in rep.terms:
            lo, hi = t.ci95
            print(f"  {t.label or t.name:<12}{t.value:+.4f}  [{lo:+.4f}, {hi:+.4f}]")
        for t in rep.granular:
            print(f"  test {t.hypothesis:<12} p={t.p_value:.3f} q={t.q_value:.3f}")
        if rep.diagnostics:
            print(f"  diagnostics {rep.diagnostics}")
