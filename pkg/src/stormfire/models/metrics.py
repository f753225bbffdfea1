"""Binary classification metrics: confusion counts, the four threshold
metrics, and rank-based ROC AUC with tie correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

THRESHOLD = 0.5


@dataclass(frozen=True)
class MetricsReport:
    roc_auc: float | None  # None when the truth is single-class
    accuracy: float
    f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    tn: int

    def to_dict(self) -> dict:
        return {
            "roc_auc": self.roc_auc,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
        }


def confusion_counts(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[int, int, int, int]:
    y_true = np.asarray(y_true, dtype=bool)
    y_pred = np.asarray(y_pred, dtype=bool)
    tp = int(np.sum(y_true & y_pred))
    fp = int(np.sum(~y_true & y_pred))
    fn = int(np.sum(y_true & ~y_pred))
    tn = int(np.sum(~y_true & ~y_pred))
    return tp, fp, fn, tn


def report_from_counts(tp: int, fp: int, fn: int, tn: int, roc: float | None) -> MetricsReport:
    n = tp + fp + fn + tn
    accuracy = (tp + tn) / n if n else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return MetricsReport(roc, accuracy, f1, precision, recall, tp, fp, fn, tn)


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their group's average rank."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(y_true: np.ndarray, scores: np.ndarray) -> float | None:
    """Mann-Whitney rank formulation; invariant under strictly monotone
    transforms of the scores. None (undefined) for single-class truth."""
    y_true = np.asarray(y_true, dtype=bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(y_true.sum())
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    rank_sum = float(ranks[y_true].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def evaluate(model, X: np.ndarray, y_true: np.ndarray) -> MetricsReport:
    """Score a fitted model at the fixed 0.5 probability threshold."""
    if len(y_true) == 0:
        raise ValueError("empty evaluation set")
    probs = model.predict_proba(np.asarray(X, dtype=np.float64))
    y_pred = probs >= THRESHOLD
    tp, fp, fn, tn = confusion_counts(y_true, y_pred)
    return report_from_counts(tp, fp, fn, tn, roc_auc(y_true, probs))
