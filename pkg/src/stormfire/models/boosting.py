"""Second-order gradient-boosted trees on logistic loss.

Each round fits a regression tree to the per-sample gradient/hessian pair;
leaf weight is -G/(H+lambda), split gain the standard regularized second-
order score, and predictions are sigmoid(base + lr * sum of tree outputs).
Training asserts the train log-loss never increases round over round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .logistic import _sigmoid
from .tree import TreeNode, apply_tree


@dataclass(frozen=True)
class BoostConfig:
    rounds: int = 200
    max_depth: int = 6
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_leaf: int = 1

    def __post_init__(self) -> None:
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")


@dataclass
class BoostedEnsemble:
    base_score: float  # log-odds of the training prior
    trees: list[TreeNode]
    learning_rate: float
    reg_lambda: float
    names: list[str] = field(default_factory=list)
    train_loss_curve: list[float] = field(default_factory=list)

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        score = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            score += self.learning_rate * _tree_output(tree, X)
        return score

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.decision_scores(X))


def _tree_output(node: TreeNode, X: np.ndarray) -> np.ndarray:
    return apply_tree(node, X)


def _leaf_weight(G: float, H: float, lam: float) -> float:
    return -G / (H + lam)


def best_split_for_column_gh(
    xs: np.ndarray, g: np.ndarray, h: np.ndarray, lam: float, gamma: float, min_leaf: int
) -> tuple[float, float] | None:
    """(gain, threshold) maximizing
    0.5*[GL^2/(HL+lam) + GR^2/(HR+lam) - G^2/(H+lam)] - gamma
    over midpoint candidates of one column; first max on ties."""
    n = len(xs)
    order = np.argsort(xs, kind="stable")
    x_s = xs[order]
    g_s = g[order]
    h_s = h[order]
    boundary = np.nonzero(x_s[:-1] < x_s[1:])[0]
    if boundary.size == 0:
        return None
    nl = boundary + 1
    ok = (nl >= min_leaf) & (n - nl >= min_leaf)
    if not ok.any():
        return None
    GL = np.cumsum(g_s)[boundary]
    HL = np.cumsum(h_s)[boundary]
    G = float(g_s.sum())
    H = float(h_s.sum())
    GR = G - GL
    HR = H - HL
    gain = 0.5 * (GL**2 / (HL + lam) + GR**2 / (HR + lam) - G**2 / (H + lam)) - gamma
    gain = np.where(ok, gain, -np.inf)
    i = int(np.argmax(gain))
    if not gain[i] > 0.0:
        return None
    thr = (x_s[boundary[i]] + x_s[boundary[i] + 1]) / 2.0
    return float(gain[i]), thr


def _grow_gh(
    X: np.ndarray, g: np.ndarray, h: np.ndarray, depth: int, cfg: BoostConfig
) -> TreeNode:
    n = len(g)
    weight = _leaf_weight(float(g.sum()), float(h.sum()), cfg.reg_lambda)
    if depth >= cfg.max_depth or n < 2:
        return TreeNode(value=weight, n=n)
    best = None  # (gain, feature, threshold)
    for f in range(X.shape[1]):
        found = best_split_for_column_gh(X[:, f], g, h, cfg.reg_lambda, cfg.gamma, cfg.min_leaf)
        if found is None:
            continue
        gain, thr = found
        if best is None or gain > best[0]:
            best = (gain, f, thr)
    if best is None:
        return TreeNode(value=weight, n=n)
    _, feature, threshold = best
    mask = X[:, feature] < threshold
    return TreeNode(
        feature=feature,
        threshold=threshold,
        n=n,
        left=_grow_gh(X[mask], g[mask], h[mask], depth + 1, cfg),
        right=_grow_gh(X[~mask], g[~mask], h[~mask], depth + 1, cfg),
    )


def _log_loss(y01: np.ndarray, score: np.ndarray) -> float:
    return float(np.mean(np.log1p(np.exp(-np.abs(score))) + np.maximum(score, 0.0) - score * y01))


def train_boosted(
    X: np.ndarray,
    y: np.ndarray,
    cfg: BoostConfig = BoostConfig(),
    names: list[str] | None = None,
) -> BoostedEnsemble:
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y, dtype=bool).astype(np.float64)
    if len(y01) == 0:
        raise ValueError("cannot fit on zero samples")
    prior = min(max(float(y01.mean()), 1e-12), 1.0 - 1e-12)
    base = math.log(prior / (1.0 - prior))
    score = np.full(len(y01), base)
    model = BoostedEnsemble(
        base_score=base,
        trees=[],
        learning_rate=cfg.learning_rate,
        reg_lambda=cfg.reg_lambda,
        names=list(names or []),
    )
    loss = _log_loss(y01, score)
    model.train_loss_curve.append(loss)
    for _ in range(cfg.rounds):
        p = _sigmoid(score)
        g = p - y01
        h = p * (1.0 - p)
        tree = _grow_gh(X, g, h, 0, cfg)
        model.trees.append(tree)
        score += cfg.learning_rate * _tree_output(tree, X)
        new_loss = _log_loss(y01, score)
        assert new_loss <= loss, (
            f"training log-loss increased: {loss} -> {new_loss} at round {len(model.trees)}"
        )
        loss = new_loss
        model.train_loss_curve.append(loss)
    return model
