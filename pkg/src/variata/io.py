"""Dataset ingestion, role files, configuration files and JSON output.

Role file format (``configparser`` sections, ``key = value``)::

    [roles]
    X = sex
    Z = age, race
    W = education, hours
    Y = income

    [categorical]
    columns = race, education

    [settings]          ; optional, same keys as the command-line flags
    scale = mean
    alpha = 0.05

Lists are comma separated. Categorical columns are label-encoded in sorted
order of their string labels; the mapping is kept in ``Dataset.codebook``.
"""
from __future__ import annotations

import configparser
import json
import math
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .data import DataError, Dataset

__all__ = ["Roles", "read_roles", "ingest_csv", "read_settings", "write_json",
           "bundled_path", "report_schema", "write_roles"]

ROLE_KEYS = ("X", "Z", "W", "Y")


class Roles(dict):
    """Role -> list of column names, plus the set of categorical columns."""

    def __init__(self, mapping, categorical=()):
        super().__init__({k: list(mapping.get(k, [])) for k in ROLE_KEYS})
        self.categorical = set(categorical)
        for k in ("X", "Y"):
            if len(self[k]) != 1:
                raise DataError(f"roles need exactly one {k} column, got {self[k]}")
        cols = [c for k in ROLE_KEYS for c in self[k]]
        dup = sorted({c for c in cols if cols.count(c) > 1})
        if dup:
            raise DataError(f"columns assigned to more than one role: {dup}")
        extra = self.categorical - set(cols)
        if extra:
            raise DataError(f"categorical columns without a role: {sorted(extra)}")
        if self["X"][0] in self.categorical or self["Y"][0] in self.categorical:
            raise DataError("X and Y cannot be declared categorical")

    @property
    def columns(self):
        return [c for k in ROLE_KEYS for c in self[k]]


def _split(value: str) -> list:
    return [v.strip() for v in value.split(",") if v.strip()]


def _parser(path) -> configparser.ConfigParser:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep role and column case
    cp.read(p)
    return cp


def read_roles(path) -> Roles:
    """Parse the ``[roles]`` and ``[categorical]`` sections of a role file."""
    cp = _parser(path)
    if not cp.has_section("roles"):
        raise DataError(f"{path}: missing [roles] section")
    sec = cp["roles"]
    unknown = set(sec) - set(ROLE_KEYS)
    if unknown:
        raise DataError(f"{path}: unknown role keys {sorted(unknown)}; use X, Z, W, Y")
    mapping = {k: _split(sec.get(k, "")) for k in ROLE_KEYS}
    cats = _split(cp["categorical"].get("columns", "")) if cp.has_section("categorical") else []
    return Roles(mapping, cats)


def read_settings(path) -> dict:
    """``[settings]`` section of a config or role file as raw strings (empty if absent)."""
    cp = _parser(path)
    return dict(cp["settings"]) if cp.has_section("settings") else {}


def write_roles(path, roles: Roles, settings: dict | None = None) -> None:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["roles"] = {k: ", ".join(v) for k, v in roles.items() if v}
    if roles.categorical:
        cp["categorical"] = {"columns": ", ".join(sorted(roles.categorical))}
    if settings:
        cp["settings"] = {k: str(v) for k, v in settings.items()}
    with open(path, "w") as fh:
        cp.write(fh)


def _numeric(df: pd.DataFrame, col: str) -> np.ndarray:
    # float() per cell: exact round-trip of repr-formatted values
    out = np.empty(len(df))
    for i, raw in enumerate(df[col].to_numpy()):
        try:
            out[i] = float(raw)
        except ValueError:
            raise DataError(f"column {col!r}, row {i + 1}: non-numeric value {raw!r}; "
                            f"declare the column categorical or clean it") from None
    return out


def ingest_csv(path, roles) -> Dataset:
    """Read a CSV with a header row into a ``Dataset``.

    Parameters
    ----------
    path : str or Path
    roles : Roles, dict or path to a role file

    Rows are numbered from 1 for the first data line (the header is not
    counted).
    """
    if not isinstance(roles, Roles):
        roles = read_roles(roles) if isinstance(roles, (str, Path)) else Roles(roles)
    p = Path(path)
    if not p.is_file():
        raise DataError(f"file not found: {p}")
    df = pd.read_csv(p, dtype=str, keep_default_na=False, skipinitialspace=True)
    missing = [c for c in roles.columns if c not in df.columns]
    if missing:
        raise DataError(f"columns missing from {p.name}: {missing}; header has {list(df.columns)}")
    for c in roles.columns:
        empty = (df[c].str.strip() == "").to_numpy() | df[c].str.upper().isin(["NA", "NAN"]).to_numpy()
        if empty.any():
            i = int(np.flatnonzero(empty)[0])
            raise DataError(f"missing value in column {c!r} at row {i + 1}")
    codebook = {}
    cols = {}
    for c in roles.columns:
        if c in roles.categorical:
            labels = sorted(df[c].str.strip().unique())
            codebook[c] = labels
            lookup = {lab: k for k, lab in enumerate(labels)}
            cols[c] = df[c].str.strip().map(lookup).to_numpy(dtype=float)
        else:
            cols[c] = _numeric(df, c)
    xname, yname = roles["X"][0], roles["Y"][0]
    x = cols[xname]
    levels = sorted(set(np.unique(x)))
    if not set(levels) <= {0.0, 1.0}:
        raise DataError(f"X must be binary {{0,1}}; column {xname!r} has values {levels[:5]}; "
                        f"remap it to 0/1 before ingestion")
    z = np.column_stack([cols[c] for c in roles["Z"]]) if roles["Z"] else None
    w = np.column_stack([cols[c] for c in roles["W"]]) if roles["W"] else None
    return Dataset(x.astype(int), z, w, cols[yname], xname, yname, list(roles["Z"]),
                   list(roles["W"]), set(roles.categorical), codebook)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, path=None) -> str:
    """Serialize ``obj`` (non-finite floats become null); write to ``path`` if given."""
    text = json.dumps(_clean(obj), indent=2, allow_nan=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def bundled_path(name: str) -> Path:
    """Path of a file shipped in ``variata/data``."""
    return Path(str(resources.files("variata") / "data" / name))


def report_schema() -> dict:
    return json.loads(bundled_path("report.schema.json").read_text())
