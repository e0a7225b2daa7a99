"""Column-typed observation tables.

Features live in a dense float matrix. Numeric and ordinal columns store
their raw values; categorical columns store integer category codes
(indices into the schema's category list) as floats.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = ["ColumnKind", "ColumnSchema", "Dataset"]


class ColumnKind(str, Enum):
    NUMERIC = "numeric"
    ORDINAL = "ordinal"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: ColumnKind
    categories: tuple = ()  # category labels, categorical columns only

    def __post_init__(self):
        if self.kind is ColumnKind.CATEGORICAL and len(self.categories) < 1:
            raise ValueError(f"categorical column {self.name!r} needs categories")


@dataclass
class Dataset:
    X: np.ndarray  # (n, p) float64
    y: np.ndarray  # (n,) outcomes
    schema: list = field(default_factory=list)
    true_mu: np.ndarray | None = None  # attached by the simulation harness

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.size:
            raise ValueError("X must be (n, p) and y must be length n")
        if len(self.schema) != self.X.shape[1]:
            raise ValueError("schema length must match number of feature columns")
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in schema")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    def subset(self, idx):
        """Row subset (copies); true_mu travels along when present."""
        mu = None if self.true_mu is None else self.true_mu[idx]
        return Dataset(self.X[idx], self.y[idx], self.schema, true_mu=mu)
