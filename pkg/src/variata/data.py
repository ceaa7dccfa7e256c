"""Tabular container shared by the estimation pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

__all__ = ["Dataset", "DataError"]


class DataError(ValueError):
    """Raised when a dataset violates role or type requirements."""


def _as_matrix(a, n):
    if a is None:
        return np.zeros((n, 0))
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    return a


@dataclass
class Dataset:
    """Rows with a binary treatment, confounders, mediators and an outcome.

    Parameters
    ----------
    x : array of {0, 1}, shape (n,)
    z : array, shape (n, d_z)
        Confounders. May have zero columns.
    w : array, shape (n, d_w)
        Mediators. May have zero columns.
    y : array, shape (n,)
    z_names, w_names : list of str
        Column names for ``z`` and ``w``.
    categorical : set of str
        Columns that hold label-encoded categories.
    codebook : dict
        Column name -> list of original category labels (index = code).
    """

    x: np.ndarray
    z: np.ndarray
    w: np.ndarray
    y: np.ndarray
    x_name: str = "X"
    y_name: str = "Y"
    z_names: list = field(default_factory=list)
    w_names: list = field(default_factory=list)
    categorical: set = field(default_factory=set)
    codebook: dict = field(default_factory=dict)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        n = self.y.shape[0]
        x = np.asarray(self.x).ravel()
        if x.shape[0] != n:
            raise DataError("X and Y lengths differ")
        if not np.isin(x, (0, 1)).all():
            raise DataError("X must be binary {0,1}; remap the treatment column before ingestion")
        self.x = x.astype(np.int8)
        self.z = _as_matrix(self.z, n)
        self.w = _as_matrix(self.w, n)
        if self.z.shape[0] != n or self.w.shape[0] != n:
            raise DataError("Z/W row counts differ from Y")
        if not self.z_names:
            self.z_names = [f"Z{i + 1}" for i in range(self.z.shape[1])]
        if not self.w_names:
            self.w_names = [f"W{i + 1}" for i in range(self.w.shape[1])]
        for arr, label in ((self.z, "Z"), (self.w, "W"), (self.y, "Y")):
            if np.isnan(arr).any():
                raise DataError(f"missing values in {label}")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def binary_outcome(self) -> bool:
        return bool(np.isin(self.y, (0.0, 1.0)).all())

    def subset(self, rows) -> "Dataset":
        return Dataset(
            self.x[rows], self.z[rows], self.w[rows], self.y[rows],
            self.x_name, self.y_name, list(self.z_names), list(self.w_names),
            set(self.categorical), dict(self.codebook),
        )

    def roles(self) -> dict:
        return {"X": [self.x_name], "Z": list(self.z_names), "W": list(self.w_names), "Y": [self.y_name]}

    def to_frame(self) -> pd.DataFrame:
        cols = {self.x_name: self.x.astype(int)}
        for j, c in enumerate(self.z_names):
            cols[c] = self.z[:, j]
        for j, c in enumerate(self.w_names):
            cols[c] = self.w[:, j]
        cols[self.y_name] = self.y
        return pd.DataFrame(cols)
