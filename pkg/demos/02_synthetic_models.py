"""Structural verdicts for the five synthetic models, with Monte Carlo
values of the interaction measures for comparison."""
from variata import Contrast, MechanismShape, builtin_scm, check_all, effect, oracle_contrast

if __name__ == "__main__":
    for name in ("M1", "M2", "M3", "M4", "M5"):
        spec = builtin_scm(name)
        print(name)
        for v in check_all(MechanismShape.from_spec(spec)):
            mc = oracle_contrast(spec, Contrast.from_effect(spec, effect(v.criterion)),
                                 mode="monte_carlo", n=200_000, seed=1)
            print(f"  {v.criterion:<9}{v.value:<16}{mc.value:+.4f} (se {mc.se:.4f})  [{v.witness}]")
