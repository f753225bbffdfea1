"""From-scratch classifiers and their evaluation machinery."""

from .data import DesignMatrix
from .metrics import MetricsReport, evaluate, roc_auc
from .logistic import LogisticConfig, LogisticModel, train_logistic
from .tree import DecisionTree, TreeConfig, train_tree
from .forest import ForestConfig, ForestModel, train_forest
from .boosting import BoostConfig, BoostedEnsemble, train_boosted
from .io import load_model, save_model
from .experiments import (
    ablation_grid,
    cross_type,
    permutation_importance,
    train_model,
)

__all__ = [
    "DesignMatrix",
    "MetricsReport",
    "evaluate",
    "roc_auc",
    "LogisticConfig",
    "LogisticModel",
    "train_logistic",
    "DecisionTree",
    "TreeConfig",
    "train_tree",
    "ForestConfig",
    "ForestModel",
    "train_forest",
    "BoostConfig",
    "BoostedEnsemble",
    "train_boosted",
    "save_model",
    "load_model",
    "ablation_grid",
    "cross_type",
    "permutation_importance",
    "train_model",
]
