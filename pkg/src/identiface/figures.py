"""Matplotlib renderings written next to the delimited report outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .metrics import EvalReport


def save_confusion_figure(report: EvalReport, path) -> Path:
    """Heatmap of the confusion matrix with per-cell counts."""
    cm = report.confusion
    k = cm.shape[0]
    fig, ax = plt.subplots(figsize=(1.0 + 0.8 * k, 1.0 + 0.8 * k))
    im = ax.imshow(cm, cmap="Blues")
    ax.set_xticks(range(k), report.labels, rotation=45, ha="right")
    ax.set_yticks(range(k), report.labels)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = cm.max() / 2 if cm.max() else 0.5
    for i in range(k):
        for j in range(k):
            ax.text(j, i, str(int(cm[i, j])), ha="center", va="center",
                    color="white" if cm[i, j] > threshold else "black", fontsize=9)
    fig.colorbar(im, ax=ax, fraction=0.046)
    ax.set_title(f"accuracy {report.accuracy * 100:.1f}%")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_metrics_figure(report: EvalReport, path) -> Path:
    """Grouped per-class precision/recall/F1 bars."""
    k = len(report.labels)
    xs = np.arange(k)
    width = 0.27
    fig, ax = plt.subplots(figsize=(1.5 + 1.1 * k, 3.6))
    ax.bar(xs - width, report.precision, width, label="precision")
    ax.bar(xs, report.recall, width, label="recall")
    ax.bar(xs + width, report.f1, width, label="f1")
    ax.set_xticks(xs, report.labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.legend(loc="lower right", fontsize=8)
    ax.set_title("per-class metrics")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_history_figure(history: list[dict], path) -> Path:
    """Loss and accuracy curves over epochs."""
    epochs = [row["epoch"] for row in history]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    ax1.plot(epochs, [row["train_loss"] for row in history], label="train")
    if any(row["val_loss"] is not None for row in history):
        ax1.plot(epochs, [row["val_loss"] for row in history], label="val")
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("loss")
    ax1.legend(fontsize=8)
    ax2.plot(epochs, [row["train_acc"] for row in history], label="train")
    if any(row["val_acc"] is not None for row in history):
        ax2.plot(epochs, [row["val_acc"] for row in history], label="val")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("accuracy")
    ax2.set_ylim(0, 1.05)
    ax2.legend(fontsize=8)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_balance_figure(rows: list[tuple[str, int, int, int]], path) -> Path:
    """Before/after class counts from an augmentation report."""
    names = [r[0] for r in rows]
    before = [r[1] for r in rows]
    after = [r[2] for r in rows]
    xs = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(1.5 + 1.1 * len(names), 3.6))
    ax.bar(xs - 0.2, before, 0.4, label="before")
    ax.bar(xs + 0.2, after, 0.4, label="after")
    ax.set_xticks(xs, names, rotation=30, ha="right")
    ax.set_ylabel("samples")
    ax.legend(fontsize=8)
    ax.set_title("class balance")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
