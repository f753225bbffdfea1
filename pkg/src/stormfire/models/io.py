"""Versioned JSON persistence for fitted models."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .boosting import BoostedEnsemble
from .forest import ForestModel
from .logistic import LogisticModel
from .tree import DecisionTree, TreeNode

FORMAT_VERSION = 1


def save_model(path, model) -> None:
    if isinstance(model, LogisticModel):
        payload = {
            "kind": "logreg",
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "feature_mean": model.feature_mean.tolist(),
            "feature_sd": model.feature_sd.tolist(),
            "names": model.names,
        }
    elif isinstance(model, ForestModel):
        payload = {
            "kind": "forest",
            "trees": [t.root.to_dict() for t in model.trees],
            "names": model.names,
            "seed": model.seed,
            "feature_subsample": model.feature_subsample,
        }
    elif isinstance(model, BoostedEnsemble):
        payload = {
            "kind": "boosted",
            "base_score": model.base_score,
            "learning_rate": model.learning_rate,
            "reg_lambda": model.reg_lambda,
            "trees": [t.to_dict() for t in model.trees],
            "train_loss_curve": model.train_loss_curve,
            "names": model.names,
        }
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    payload["format_version"] = FORMAT_VERSION
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path):
    with Path(path).open(encoding="utf-8") as fh:
        payload = json.load(fh)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {version!r}")
    kind = payload.get("kind")
    if kind == "logreg":
        return LogisticModel(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            feature_mean=np.asarray(payload["feature_mean"], dtype=np.float64),
            feature_sd=np.asarray(payload["feature_sd"], dtype=np.float64),
            names=list(payload["names"]),
        )
    if kind == "forest":
        return ForestModel(
            trees=[DecisionTree(TreeNode.from_dict(d), list(payload["names"])) for d in payload["trees"]],
            names=list(payload["names"]),
            seed=payload.get("seed"),
            feature_subsample=payload.get("feature_subsample"),
        )
    if kind == "boosted":
        return BoostedEnsemble(
            base_score=float(payload["base_score"]),
            trees=[TreeNode.from_dict(d) for d in payload["trees"]],
            learning_rate=float(payload["learning_rate"]),
            reg_lambda=float(payload["reg_lambda"]),
            names=list(payload["names"]),
            train_loss_curve=list(payload["train_loss_curve"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")
