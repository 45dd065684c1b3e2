"""Classification metrics: accuracy, one-hot MSE, per-class P/R/F1.

The predicted class is the argmax of each probability row, with ties going
to the lowest class index.  Precision and recall define 0/0 as 0, and the
summary averages are MACRO (unweighted over classes) -- a choice that
matters when comparing against weighted-average numbers elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UsageError

ROW_SUM_ATOL = 1e-6


@dataclass
class ClassificationReport:
    """Per-class and macro rates plus accuracy and mean squared error."""

    per_class: list[tuple[int, float, float, float, int]]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    mse: float

    def to_flat_dict(self) -> dict[str, float]:
        """Flat key-value view, ready for JSON output."""
        out: dict[str, float] = {
            "accuracy": self.accuracy,
            "mse": self.mse,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
        }
        for cls, precision, recall, f1, support in self.per_class:
            out[f"precision_{cls}"] = precision
            out[f"recall_{cls}"] = recall
            out[f"f1_{cls}"] = f1
            out[f"support_{cls}"] = support
        return out


def _rate(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator > 0 else 0.0


def evaluate(predicted_probs: np.ndarray, labels: np.ndarray) -> ClassificationReport:
    """Score probability rows against integer labels."""
    probs = np.asarray(predicted_probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if probs.ndim != 2:
        raise UsageError(f"predicted_probs must be [N][C], got shape {probs.shape}")
    n_samples, n_classes = probs.shape
    if labels.shape != (n_samples,):
        raise UsageError(f"labels shape {labels.shape} does not match {n_samples} rows")
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise UsageError(f"labels must lie in [0, {n_classes})")
    row_sums = probs.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_ATOL):
        worst = int(np.argmax(np.abs(row_sums - 1.0)))
        raise UsageError(f"row {worst} sums to {row_sums[worst]!r}, not 1")

    predicted = np.argmax(probs, axis=1)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    for true, pred in zip(labels, predicted):
        confusion[true, pred] += 1

    per_class: list[tuple[int, float, float, float, int]] = []
    precisions, recalls, f1s = [], [], []
    for cls in range(n_classes):
        tp = int(confusion[cls, cls])
        fp = int(confusion[:, cls].sum() - tp)
        fn = int(confusion[cls, :].sum() - tp)
        precision = _rate(tp, tp + fp)
        recall = _rate(tp, tp + fn)
        f1 = _rate(2.0 * precision * recall, precision + recall)
        support = int(confusion[cls, :].sum())
        per_class.append((cls, precision, recall, f1, support))
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    targets = np.zeros_like(probs)
    targets[np.arange(n_samples), labels] = 1.0
    return ClassificationReport(
        per_class=per_class,
        macro_precision=float(np.mean(precisions)),
        macro_recall=float(np.mean(recalls)),
        macro_f1=float(np.mean(f1s)),
        accuracy=float(np.trace(confusion) / n_samples),
        mse=float(np.mean((targets - probs) ** 2)),
    )
