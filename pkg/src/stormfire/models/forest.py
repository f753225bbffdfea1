"""Random forest: bootstrapped trees with per-split feature subsampling,
prediction by mean leaf probability. Tree fits are independent and seeded, so
the ensemble is identical for any worker count."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .tree import DecisionTree, TreeConfig, train_tree


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 1
    min_split: int = 2
    bootstrap: bool = True
    feature_subsample: str | None = "sqrt"  # "sqrt" or None (all features)

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.feature_subsample not in (None, "sqrt"):
            raise ValueError(f"unknown feature_subsample {self.feature_subsample!r}")


@dataclass
class ForestModel:
    trees: list[DecisionTree]
    names: list[str] = field(default_factory=list)
    seed: int | None = None  # root of the per-tree seed sequence
    feature_subsample: str | None = "sqrt"

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0])
        for tree in self.trees:
            acc += tree.predict_proba(X)
        return acc / len(self.trees)


def _fit_one(args) -> DecisionTree:
    X, y01, cfg, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    n, d = X.shape
    if cfg.bootstrap:
        rows = rng.integers(0, n, size=n)
        Xb, yb = X[rows], y01[rows]
    else:
        Xb, yb = X, y01
    k = max(1, int(math.isqrt(d))) if cfg.feature_subsample == "sqrt" else None
    tree_cfg = TreeConfig(max_depth=cfg.max_depth, min_leaf=cfg.min_leaf, min_split=cfg.min_split)
    return train_tree(Xb, yb, tree_cfg, rng=rng, n_feature_candidates=k)


def train_forest(
    X: np.ndarray,
    y: np.ndarray,
    cfg: ForestConfig = ForestConfig(),
    seed: int = 0,
    names: list[str] | None = None,
    workers: int = 1,
) -> ForestModel:
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y, dtype=bool).astype(np.float64)
    seeds = np.random.SeedSequence(entropy=[seed, 0xF0E]).spawn(cfg.n_trees)
    tasks = [(X, y01, cfg, s) for s in seeds]
    if workers > 1 and cfg.n_trees > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(_fit_one, tasks, chunksize=max(1, cfg.n_trees // (4 * workers))))
    else:
        trees = [_fit_one(t) for t in tasks]
    return ForestModel(
        trees=trees, names=list(names or []),
        seed=seed, feature_subsample=cfg.feature_subsample,
    )
