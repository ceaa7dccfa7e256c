"""Command-line entry point.

Subcommands::

    variata simulate   --scm M1 --n 2000 --seed 1 --out d.csv
    variata check      --scm M1 [--scale mean]
    variata decompose  --data d.csv --roles d.roles --scale mean --alpha 0.05
    variata test       --data d.csv --roles d.roles --hypothesis TE-SE
    variata experiment --grid desk --out results/

Settings are resolved in this order, later wins: built-in defaults, the
``[settings]`` section of ``--config``, the ``[settings]`` section of
``--roles``, then command-line flags. Failures print a JSON object with
``"kind": "error"`` to stdout and exit with status 2 (usage) or 1 (runtime).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .builtin import builtin_names, builtin_scm
from .experiments import desk_grid, full_grid, run_grid, summarize
from .inference import SCHEMA_VERSION, interaction_test, run_alg1, run_alg2, z_specific_de_ie
from .effects import effect
from .estimators import effect_estimate
from .io import Roles, ingest_csv, read_roles, read_settings, write_json, write_roles
from .learners import LearnerConfig
from .nuisance import fit_nuisances, make_fold_plan
from .scm import parse_scm, sample_frame
from .structural import MechanismShape, check_all

__all__ = ["main", "RunConfig", "dispatch", "UsageError"]

SUBCOMMANDS = ("simulate", "check", "decompose", "test", "experiment")
SCALES = ("mean", "log-risk", "log-odds")
HYPOTHESES = ("TE-SE", "DE-IE", "DE-SE", "IE-SE", "DE-IE-SE", "z-DE-IE")
_LINK_SCALE = {"identity": "mean", "log": "log-risk", "logit": "log-odds"}

# setting name -> (type, default)
SETTINGS = {
    "scale": (str, "mean"),
    "alpha": (float, 0.05),
    "folds": (int, 10),
    "clip_e": (float, 0.01),
    "clip_mu": (float, 0.005),
    "learner": (str, "table"),
    "seed": (int, 0),
    "estimator": (str, "onestep"),
}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Resolved settings for one invocation."""

    subcommand: str
    data: str | None = None
    roles: str | None = None
    scm: str | None = None
    out: str | None = None
    scale: str = "mean"
    alpha: float = 0.05
    folds: int = 10
    clip_e: float = 0.01
    clip_mu: float = 0.005
    learner: str = "table"
    seed: int = 0
    estimator: str = "onestep"
    n: int = 1000
    hypothesis: str = "TE-SE"
    z_value: list = field(default_factory=list)
    grid: str = "desk"
    scms: list = field(default_factory=list)
    sizes: list = field(default_factory=list)
    reps: int | None = None
    scale_given: bool = False

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise UsageError(f"unknown subcommand {self.subcommand!r}; choose from {SUBCOMMANDS}")
        if self.scale not in SCALES:
            raise UsageError(f"--scale must be one of {SCALES}")
        if not 0 < self.alpha < 1:
            raise UsageError("--alpha must lie in (0, 1)")
        if self.folds < 2:
            raise UsageError("--folds must be >= 2")
        if not 0 < self.clip_e < 0.5:
            raise UsageError("--clip-e must lie in (0, 0.5)")
        if not 0 < self.clip_mu < 0.5:
            raise UsageError("--clip-mu must lie in (0, 0.5)")
        if self.learner not in ("table", "stumps"):
            raise UsageError("--learner must be 'table' or 'stumps'")
        if self.estimator not in ("plugin", "onestep"):
            raise UsageError("--estimator must be 'plugin' or 'onestep'")
        if self.n < 1:
            raise UsageError("--n must be >= 1")

    def learner_config(self) -> LearnerConfig:
        return LearnerConfig(kind=self.learner, clip_e=self.clip_e, clip_mu=self.clip_mu, seed=self.seed)

    def echo(self) -> dict:
        keys = ("alpha", "folds", "clip_e", "clip_mu", "learner", "seed", "estimator", "scale")
        return {k: getattr(self, k) for k in keys}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="variata", description="Interaction-aware causal decompositions.")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)

    def common(sp, data=True):
        sp.add_argument("--config", help="key=value file with a [settings] section")
        sp.add_argument("--scm", help="builtin model name or path to a model file")
        if data:
            sp.add_argument("--data", help="CSV with a header row")
            sp.add_argument("--roles", help="role file mapping columns to X/Z/W/Y")
        sp.add_argument("--scale", choices=SCALES)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--folds", type=int)
        sp.add_argument("--clip-e", dest="clip_e", type=float)
        sp.add_argument("--clip-mu", dest="clip_mu", type=float)
        sp.add_argument("--learner", choices=("table", "stumps"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--estimator", choices=("plugin", "onestep"))
        sp.add_argument("--out", help="output path (stdout when omitted)")

    sp = sub.add_parser("simulate", help="sample a model to CSV")
    common(sp, data=False)
    sp.add_argument("--n", type=int, default=1000)
    sp = sub.add_parser("check", help="structural interaction verdicts")
    common(sp, data=False)
    sp = sub.add_parser("decompose", help="parsimonious TV decomposition")
    common(sp)
    sp.add_argument("--n", type=int, default=None, help="rows to simulate when --scm is used")
    sp = sub.add_parser("test", help="one interaction test")
    common(sp)
    sp.add_argument("--n", type=int, default=None, help="rows to simulate when --scm is used")
    sp.add_argument("--hypothesis", choices=HYPOTHESES, default="TE-SE")
    sp.add_argument("--z-value", dest="z_value", type=float, nargs="+", default=None)
    sp = sub.add_parser("experiment", help="synthetic calibration grid")
    common(sp, data=False)
    sp.add_argument("--grid", choices=("desk", "full"), default="desk")
    sp.add_argument("--scms", nargs="+")
    sp.add_argument("--sizes", nargs="+", type=int)
    sp.add_argument("--reps", type=int)
    return p


def _coerce(key, raw):
    typ = SETTINGS[key][0]
    try:
        return typ(raw)
    except ValueError:
        raise UsageError(f"setting {key!r}: cannot read {raw!r} as {typ.__name__}") from None


def _file_settings(path) -> dict:
    out = {}
    for k, v in read_settings(path).items():
        key = k.replace("-", "_")
        if key not in SETTINGS:
            raise UsageError(f"{path}: unknown setting {k!r}; known: {sorted(SETTINGS)}")
        out[key] = _coerce(key, v)
    return out


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, role-file settings and flags into a ``RunConfig``."""
    if args.subcommand is None:
        raise UsageError(f"missing subcommand; choose from {SUBCOMMANDS}")
    ns = vars(args)
    values = {k: d for k, (_, d) in SETTINGS.items()}
    given = set()
    for src in ("config", "roles"):
        if ns.get(src):
            found = _file_settings(ns[src])
            values.update(found)
            given.update(found)
    for k in SETTINGS:
        if ns.get(k) is not None:
            values[k] = ns[k]
            given.add(k)
    extra = {}
    for k in ("data", "roles", "scm", "out", "n", "hypothesis", "grid", "scms", "sizes", "reps"):
        if ns.get(k) is not None:
            extra[k] = ns[k]
    if ns.get("z_value") is not None:
        extra["z_value"] = ns["z_value"]
    cfg = RunConfig(args.subcommand, **values, **extra, scale_given="scale" in given)
    _check_conflicts(cfg)
    return cfg


def _check_conflicts(cfg: RunConfig):
    sc = cfg.subcommand
    if sc in ("simulate", "check") and not cfg.scm:
        raise UsageError(f"{sc} needs --scm")
    if sc in ("decompose", "test"):
        if cfg.data and cfg.scm:
            raise UsageError("--data and --scm are mutually exclusive")
        if not cfg.data and not cfg.scm:
            raise UsageError(f"{sc} needs --data with --roles, or --scm")
        if cfg.data and not cfg.roles:
            raise UsageError("--data needs --roles")
        if cfg.hypothesis == "z-DE-IE" and not cfg.z_value:
            raise UsageError("--hypothesis z-DE-IE needs --z-value")
        if cfg.z_value and cfg.hypothesis != "z-DE-IE":
            raise UsageError("--z-value only applies to --hypothesis z-DE-IE")
    if sc == "experiment" and cfg.out is None:
        raise UsageError("experiment needs --out (a directory)")


def load_scm(ref: str):
    """Builtin model by name, or a model file."""
    if ref in builtin_names():
        return builtin_scm(ref)
    p = Path(ref)
    if p.is_file():
        return parse_scm(p.read_text(), name=p.stem)
    raise UsageError(f"--scm {ref!r} is neither a builtin model ({', '.join(builtin_names())}) nor a file")


def _load_data(cfg: RunConfig):
    if cfg.data:
        return ingest_csv(cfg.data, read_roles(cfg.roles)), {"data": cfg.data, "roles": cfg.roles}
    from .scm import sample_observational

    n = cfg.n or 2000
    return sample_observational(load_scm(cfg.scm), n, cfg.seed), {"scm": cfg.scm, "n": n}


def _emit(obj, cfg) -> str:
    text = write_json(obj, cfg.out)
    return "" if cfg.out else text


def _simulate(cfg):
    spec = load_scm(cfg.scm)
    frame = sample_frame(spec, cfg.n, cfg.seed)
    frame[spec.x] = frame[spec.x].astype(int)
    roles = Roles({"X": [spec.x], "Z": list(spec.z_vars), "W": list(spec.w_vars), "Y": [spec.y]})
    if cfg.out:
        frame.to_csv(cfg.out, index=False, float_format="%.17g")
        write_roles(str(cfg.out) + ".roles", roles)
        return ""
    return frame.to_csv(index=False, float_format="%.17g")


def _check(cfg):
    spec = load_scm(cfg.scm)
    shape = MechanismShape.from_spec(spec)
    scale = cfg.scale if cfg.scale_given else _LINK_SCALE[shape.link]
    verdicts = check_all(shape, scale)
    return _emit({"schema_version": SCHEMA_VERSION, "kind": "structural", "scm": cfg.scm,
                  "scale": scale, "verdicts": [v.to_dict() for v in verdicts]}, cfg)


def _fits(cfg, data):
    plan = make_fold_plan(data.x, cfg.folds, cfg.seed)
    return fit_nuisances(data, plan, cfg.learner_config(), cfg.scale)


def _decompose(cfg):
    data, source = _load_data(cfg)
    fits = _fits(cfg, data)
    echo = dict(cfg.echo(), **source)
    if data.codebook:
        echo["codebook"] = data.codebook
    run = run_alg1 if cfg.scale == "mean" else run_alg2
    report = run(fits, data, cfg.alpha, cfg.estimator, config=echo)
    return _emit(report.to_dict(), cfg)


def _test(cfg):
    data, source = _load_data(cfg)
    fits = _fits(cfg, data)
    if cfg.hypothesis == "z-DE-IE":
        res = z_specific_de_ie(fits, data, cfg.z_value, cfg.alpha, kind=cfg.estimator)
    else:
        est = effect_estimate(fits, data, effect(cfg.hypothesis, cfg.scale), cfg.estimator)
        res = interaction_test(est, cfg.alpha)
    out = {"schema_version": SCHEMA_VERSION, "kind": "test", "result": res.to_dict(),
           "config": dict(cfg.echo(), **source), "notes": list(fits.notes)}
    return _emit(out, cfg)


def _experiment(cfg):
    kw = {"alpha": cfg.alpha, "seed_base": cfg.seed, "estimator": cfg.estimator}
    if cfg.scms:
        kw["scms"] = tuple(cfg.scms)
    if cfg.sizes:
        kw["sizes"] = tuple(sorted(cfg.sizes))
    if cfg.reps is not None:
        kw["reps"] = cfg.reps
    grid = full_grid(**kw) if cfg.grid == "full" else desk_grid(**kw)
    table = run_grid(grid)
    summary = summarize(table, grid.alpha)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "pvalues.csv")
    summary.ecdf.to_csv(out / "ecdf.csv", index=False)
    doc = summary.to_dict()
    doc["grid"] = grid.to_dict()
    write_json(doc, out / "summary.json")
    return ""


_HANDLERS = {"simulate": _simulate, "check": _check, "decompose": _decompose,
             "test": _test, "experiment": _experiment}


def dispatch(cfg: RunConfig) -> str:
    """Run one subcommand; returns text destined for stdout."""
    return _HANDLERS[cfg.subcommand](cfg)


def _error(exc, status) -> int:
    doc = {"schema_version": SCHEMA_VERSION, "kind": "error", "error": type(exc).__name__,
           "message": str(exc), "status": status}
    sys.stdout.write(json.dumps(doc) + "\n")
    return status


def main(argv=None) -> int:
    try:
        cfg = resolve(build_parser().parse_args(argv))
    except (ValueError, OSError) as exc:
        return _error(exc, 2)
    try:
        text = dispatch(cfg)
    except UsageError as exc:
        return _error(exc, 2)
    except (ValueError, OSError, ArithmeticError) as exc:
        return _error(exc, 1)
    if text:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
