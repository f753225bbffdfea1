"""Experiment drivers: the feature-ablation grid, the cross-ignition-type
2x2 accuracy table, and permutation feature importance."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .boosting import BoostConfig, train_boosted
from .data import DesignMatrix
from .forest import ForestConfig, train_forest
from .logistic import LogisticConfig, train_logistic
from .metrics import THRESHOLD, evaluate

MODEL_KINDS = ("logreg", "forest", "boosted")


def train_model(
    kind: str,
    dm: DesignMatrix,
    hyper: dict | None = None,
    seed: int = 0,
    workers: int = 1,
):
    """Fit one model kind on the train split of a design matrix."""
    hyper = dict(hyper or {})
    train = dm.only_split("train")
    if kind == "logreg":
        cfg = LogisticConfig(**hyper)
        return train_logistic(train.X, train.y, cfg, names=train.names)
    if kind == "forest":
        cfg = ForestConfig(**hyper)
        return train_forest(train.X, train.y, cfg, seed=seed, names=train.names, workers=workers)
    if kind == "boosted":
        cfg = BoostConfig(**hyper)
        return train_boosted(train.X, train.y, cfg, names=train.names)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def ablation_grid(
    dm: DesignMatrix,
    feature_sets: Sequence[tuple[int, Sequence[str]]],
    model_kinds: Sequence[str] = MODEL_KINDS,
    seed: int = 0,
    hyper_by_kind: dict[str, dict] | None = None,
    workers: int = 1,
) -> list[dict]:
    """One evaluation row per (feature set, model kind), test-split metrics."""
    hyper_by_kind = hyper_by_kind or {}
    rows = []
    for number, names in feature_sets:
        sub = dm.select(list(names))
        test = sub.only_split("test")
        for kind in model_kinds:
            model = train_model(kind, sub, hyper_by_kind.get(kind), seed=seed, workers=workers)
            report = evaluate(model, test.X, test.y)
            rows.append({
                "model_number": number,
                "model_kind": kind,
                "n_features": len(names),
                **report.to_dict(),
            })
    return rows


def cross_type(
    lightning_dm: DesignMatrix,
    anthro_dm: DesignMatrix,
    feature_sets: Sequence[tuple[str, Sequence[str]]],
    model_kind: str = "boosted",
    seed: int = 0,
    hyper: dict | None = None,
    workers: int = 1,
) -> list[dict]:
    """Train on each ignition type, test on both: a 2x2 accuracy table per
    feature configuration."""
    datasets = {"lightning": lightning_dm, "anthropogenic": anthro_dm}
    rows = []
    for config_name, names in feature_sets:
        models = {
            ds_name: train_model(model_kind, dm.select(list(names)), hyper, seed=seed, workers=workers)
            for ds_name, dm in datasets.items()
        }
        for train_name, model in models.items():
            for test_name, dm in datasets.items():
                test = dm.select(list(names)).only_split("test")
                report = evaluate(model, test.X, test.y)
                rows.append({
                    "feature_config": config_name,
                    "train_on": train_name,
                    "test_on": test_name,
                    "accuracy": report.accuracy,
                })
    return rows


def permutation_importance(
    model,
    X: np.ndarray,
    y: np.ndarray,
    seed: int = 0,
    repeats: int = 5,
) -> np.ndarray:
    """Mean accuracy drop per feature when that column alone is shuffled."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=bool)
    baseline = float(np.mean((model.predict_proba(X) >= THRESHOLD) == y))
    n, d = X.shape
    drops = np.zeros(d)
    for r in range(repeats):
        rng = np.random.default_rng([seed, r, 0x1394])
        for j in range(d):
            perm = rng.permutation(n)
            Xp = X.copy()
            Xp[:, j] = X[perm, j]
            acc = float(np.mean((model.predict_proba(Xp) >= THRESHOLD) == y))
            drops[j] += baseline - acc
    return drops / repeats
