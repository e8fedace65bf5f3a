"""Confusion matrices, accuracy and per-class precision/recall/F1 reports.

Conventions: confusion rows are true labels, columns predicted; a metric
with a zero denominator is 0; rendered tables print integer percentages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


def confusion_matrix(y_true, y_pred, k: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_true.shape != y_pred.shape:
        raise DataError(f"length mismatch: {y_true.shape[0]} true vs {y_pred.shape[0]} predicted")
    if y_true.size and (
        y_true.min() < 0 or y_true.max() >= k or y_pred.min() < 0 or y_pred.max() >= k
    ):
        raise DataError(f"labels must lie in [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def classification_report(confusion) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(precision, recall, f1) per class from a confusion matrix."""
    cm = np.asarray(confusion, dtype=np.float64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1] or cm.shape[0] < 2:
        raise DataError(f"confusion matrix must be KxK with K >= 2, got shape {cm.shape}")
    diag = np.diag(cm)
    colsum = cm.sum(axis=0)
    rowsum = cm.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(colsum > 0, diag / np.maximum(colsum, 1e-300), 0.0)
        recall = np.where(rowsum > 0, diag / np.maximum(rowsum, 1e-300), 0.0)
        pr = precision + recall
        f1 = np.where(pr > 0, 2.0 * precision * recall / np.where(pr > 0, pr, 1.0), 0.0)
    return precision, recall, f1


@dataclass
class EvalReport:
    confusion: np.ndarray
    labels: list[str]
    accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "classes": [
                {
                    "label": self.labels[i],
                    "precision": float(self.precision[i]),
                    "recall": float(self.recall[i]),
                    "f1": float(self.f1[i]),
                    "support": int(self.support[i]),
                }
                for i in range(len(self.labels))
            ],
        }

    @classmethod
    def from_dict(cls, d):
        labels = list(d["labels"])
        return cls(
            confusion=np.asarray(d["confusion"], dtype=np.int64),
            labels=labels,
            accuracy=float(d["accuracy"]),
            precision=np.array([c["precision"] for c in d["classes"]]),
            recall=np.array([c["recall"] for c in d["classes"]]),
            f1=np.array([c["f1"] for c in d["classes"]]),
            support=np.array([c["support"] for c in d["classes"]], dtype=np.int64),
        )


def make_report(y_true, y_pred, labels: list[str]) -> EvalReport:
    k = len(labels)
    cm = confusion_matrix(y_true, y_pred, k)
    total = int(cm.sum())
    if total == 0:
        raise DataError("cannot evaluate an empty sample set (accuracy undefined)")
    precision, recall, f1 = classification_report(cm)
    return EvalReport(
        confusion=cm,
        labels=list(labels),
        accuracy=float(np.trace(cm) / total),
        precision=precision,
        recall=recall,
        f1=f1,
        support=cm.sum(axis=1),
    )


def report_from_confusion(cm, labels: list[str]) -> EvalReport:
    cm = np.asarray(cm, dtype=np.int64)
    if cm.sum() == 0:
        raise DataError("cannot evaluate an empty sample set (accuracy undefined)")
    precision, recall, f1 = classification_report(cm)
    return EvalReport(
        confusion=cm,
        labels=list(labels),
        accuracy=float(np.trace(cm) / cm.sum()),
        precision=precision,
        recall=recall,
        f1=f1,
        support=cm.sum(axis=1),
    )


def _pct(x: float) -> str:
    return f"{int(np.floor(x * 100.0 + 0.5))}%"


def render_report(report: EvalReport) -> str:
    """Fixed-width classification report with integer-percent cells."""
    if len(report.labels) != report.confusion.shape[0]:
        raise DataError(
            f"{len(report.labels)} label names for a {report.confusion.shape[0]}-class matrix"
        )
    header = ("class", "precision", "recall", "f1-score", "support")
    rows = [
        (
            report.labels[i],
            _pct(report.precision[i]),
            _pct(report.recall[i]),
            _pct(report.f1[i]),
            str(int(report.support[i])),
        )
        for i in range(len(report.labels))
    ]
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(5)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(v.ljust(widths[i]) for i, v in enumerate(r)))
    lines.append("")
    lines.append(f"accuracy: {_pct(report.accuracy)} ({int(np.trace(report.confusion))}/"
                 f"{int(report.confusion.sum())})")
    return "\n".join(lines) + "\n"


def confusion_csv(report: EvalReport) -> str:
    """Delimited confusion matrix: header row of predicted labels, one row
    per true label."""
    lines = ["true\\pred," + ",".join(report.labels)]
    for i, name in enumerate(report.labels):
        lines.append(name + "," + ",".join(str(int(v)) for v in report.confusion[i]))
    return "\n".join(lines) + "\n"
