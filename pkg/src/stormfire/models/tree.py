"""CART-style binary classification tree: exact greedy Gini splits over
midpoint thresholds, deterministic tie-breaking by lowest feature index then
lowest threshold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int = 6
    min_leaf: int = 1
    min_split: int = 2


@dataclass
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    value: float = 0.0  # leaf probability of the positive class
    n: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"value": self.value, "n": self.n}
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "n": self.n,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TreeNode":
        if "feature" not in d:
            return cls(value=d["value"], n=d.get("n", 0))
        return cls(
            feature=d["feature"],
            threshold=d["threshold"],
            n=d.get("n", 0),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


@dataclass
class DecisionTree:
    root: TreeNode
    names: list[str]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return apply_tree(self.root, np.asarray(X, dtype=np.float64))


def apply_tree(root: TreeNode, X: np.ndarray) -> np.ndarray:
    """Leaf value per row, evaluated by partitioning index arrays node by
    node rather than walking row by row."""
    out = np.empty(X.shape[0])
    stack = [(root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if idx.size == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
            continue
        mask = X[idx, node.feature] < node.threshold
        stack.append((node.left, idx[mask]))
        stack.append((node.right, idx[~mask]))
    return out


def gini(counts1: np.ndarray, total: np.ndarray) -> np.ndarray:
    p1 = counts1 / total
    p0 = (total - counts1) / total
    return 1.0 - p1 * p1 - p0 * p0


def best_split_for_column(
    xs: np.ndarray, y01: np.ndarray, min_leaf: int
) -> tuple[float, float] | None:
    """(gain, threshold) with the first-occurring maximum gain for one
    feature column, or None when no admissible split improves impurity."""
    n = len(xs)
    order = np.argsort(xs, kind="stable")
    x_s = xs[order]
    y_s = y01[order]
    boundary = np.nonzero(x_s[:-1] < x_s[1:])[0]
    if boundary.size == 0:
        return None
    nl = (boundary + 1).astype(np.float64)
    nr = n - nl
    ok = (nl >= min_leaf) & (nr >= min_leaf)
    if not ok.any():
        return None
    ones_left = np.cumsum(y_s)[boundary].astype(np.float64)
    total_ones = float(y_s.sum())
    parent = gini(np.array(total_ones), np.array(float(n)))
    gain = parent - (nl / n) * gini(ones_left, nl) - (nr / n) * gini(total_ones - ones_left, nr)
    gain = np.where(ok, gain, -np.inf)
    i = int(np.argmax(gain))  # first max = lowest threshold
    if not gain[i] > 0.0:
        return None
    thr = (x_s[boundary[i]] + x_s[boundary[i] + 1]) / 2.0
    return float(gain[i]), thr


def find_best_split(
    X: np.ndarray, y01: np.ndarray, min_leaf: int, feature_candidates: np.ndarray
) -> tuple[int, float] | None:
    best = None  # (gain, feature, threshold)
    for f in feature_candidates:
        found = best_split_for_column(X[:, f], y01, min_leaf)
        if found is None:
            continue
        gain, thr = found
        if best is None or gain > best[0]:
            best = (gain, int(f), thr)
    if best is None:
        return None
    return best[1], best[2]


def _grow(
    X: np.ndarray,
    y01: np.ndarray,
    depth: int,
    cfg: TreeConfig,
    rng: np.random.Generator | None,
    n_candidates: int | None,
) -> TreeNode:
    n = len(y01)
    value = float(y01.mean())
    if depth >= cfg.max_depth or n < cfg.min_split or value in (0.0, 1.0):
        return TreeNode(value=value, n=n)
    d = X.shape[1]
    if n_candidates is not None and n_candidates < d:
        candidates = np.sort(rng.choice(d, size=n_candidates, replace=False))
    else:
        candidates = np.arange(d)
    found = find_best_split(X, y01, cfg.min_leaf, candidates)
    if found is None:
        return TreeNode(value=value, n=n)
    feature, threshold = found
    mask = X[:, feature] < threshold
    left = _grow(X[mask], y01[mask], depth + 1, cfg, rng, n_candidates)
    right = _grow(X[~mask], y01[~mask], depth + 1, cfg, rng, n_candidates)
    return TreeNode(feature=feature, threshold=threshold, left=left, right=right, n=n)


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    cfg: TreeConfig = TreeConfig(),
    names: list[str] | None = None,
    rng: np.random.Generator | None = None,
    n_feature_candidates: int | None = None,
) -> DecisionTree:
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y, dtype=bool).astype(np.float64)
    if len(y01) == 0:
        raise ValueError("cannot fit a tree on zero samples")
    root = _grow(X, y01, 0, cfg, rng, n_feature_candidates)
    return DecisionTree(root=root, names=list(names or []))
