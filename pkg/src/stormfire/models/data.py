"""Model-ready matrix: features, labels, and split tags, no missing entries."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class DesignMatrix:
    X: np.ndarray  # (n, d) float64
    y: np.ndarray  # (n,) bool
    names: list[str]
    split: np.ndarray  # (n,) unicode, train | test | holdout

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=bool)
        self.split = np.asarray(self.split)
        if self.X.ndim != 2 or self.X.shape[0] == 0:
            raise ValueError("design matrix must be non-empty and 2-D")
        if self.X.shape[0] != self.y.shape[0] or self.X.shape[0] != self.split.shape[0]:
            raise ValueError("rows, labels, and splits must align")
        if self.X.shape[1] != len(self.names):
            raise ValueError("names must match column count")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")
        if not np.isfinite(self.X).all():
            raise ValueError("design matrix contains non-finite entries")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_rows(cls, rows: Sequence[dict], names: Sequence[str]) -> "DesignMatrix":
        """Build from assembled feature dicts carrying `label` and `split`."""
        if not rows:
            raise ValueError("no rows")
        X = np.empty((len(rows), len(names)), dtype=np.float64)
        y = np.empty(len(rows), dtype=bool)
        split = []
        for i, row in enumerate(rows):
            for j, name in enumerate(names):
                value = row.get(name)
                if value is None:
                    raise ValueError(f"missing entry {name!r} in row {i}")
                X[i, j] = value
            y[i] = bool(row["label"])
            split.append(row["split"])
        return cls(X, y, list(names), np.array(split))

    def subset(self, mask: np.ndarray) -> "DesignMatrix":
        return DesignMatrix(self.X[mask], self.y[mask], list(self.names), self.split[mask])

    def only_split(self, *splits: str) -> "DesignMatrix":
        mask = np.isin(self.split, list(splits))
        if not mask.any():
            raise ValueError(f"no rows in split {splits}")
        return self.subset(mask)

    def select(self, names: Sequence[str]) -> "DesignMatrix":
        idx = [self.names.index(n) for n in names]
        return DesignMatrix(self.X[:, idx], self.y, list(names), self.split)
