"""Mini-batch Adam training with validation tracking and early stopping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import DataError, NumericError, RangeError
from .model import VggClassifier
from .optim import Adam


@dataclass
class TrainConfig:
    lr: float = 1e-4
    batch_size: int = 32
    test_size: float = 0.2
    epochs: int = 100
    patience: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.lr <= 0:
            raise RangeError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise RangeError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0.0 < self.test_size < 1.0:
            raise RangeError(f"test_size must be in (0, 1), got {self.test_size}")
        if self.epochs < 1:
            raise RangeError(f"epochs must be >= 1, got {self.epochs}")
        if self.patience is not None and self.patience > self.epochs:
            raise RangeError(
                f"patience {self.patience} exceeds epoch budget {self.epochs}"
            )

    def to_dict(self):
        return {
            "lr": self.lr,
            "batch_size": self.batch_size,
            "test_size": self.test_size,
            "epochs": self.epochs,
            "patience": self.patience,
            "seed": self.seed,
        }


class EarlyStopper:
    """Tracks best validation loss; signals a stop after ``patience``
    consecutive epochs without improvement."""

    def __init__(self, patience: int | None):
        if patience is not None and patience < 1:
            raise RangeError(f"patience must be >= 1, got {patience}")
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch: int | None = None
        self.streak = 0

    def update(self, val_loss: float, epoch: int) -> tuple[bool, bool]:
        """Feed one epoch's validation loss. Returns (improved, should_stop)."""
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.streak = 0
            return True, False
        self.streak += 1
        return False, self.patience is not None and self.streak >= self.patience


def _epoch_metrics(model: VggClassifier, x, y, batch_size) -> tuple[float, float]:
    """Inference-mode mean loss and accuracy over a dataset."""
    total_loss = 0.0
    correct = 0
    n = y.shape[0]
    for start in range(0, n, batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        logits = model.forward(xb, training=False)
        loss, probs = T.softmax_cross_entropy(logits, yb)
        total_loss += float(loss.data) * yb.shape[0]
        correct += int((probs.argmax(axis=1) == yb).sum())
    return total_loss / n, correct / n


def train(model: VggClassifier, train_x, train_y, config: TrainConfig,
          val_x=None, val_y=None) -> list[dict]:
    """Train in place; returns per-epoch history rows.

    With a validation set the model ends at the best-val-loss epoch's
    weights and ``config.patience`` (if set) stops training after that many
    consecutive non-improving epochs. Without one, training runs all epochs
    and keeps the final weights.
    """
    train_y = np.asarray(train_y, dtype=np.int64)
    if train_y.size == 0:
        raise DataError("training set is empty")
    k = len(model.spec.label_map)
    present = np.unique(train_y)
    missing = [model.spec.label_map[i] for i in range(k) if i not in present]
    if missing:
        raise DataError(f"training set has no samples for classes: {missing}")
    has_val = val_x is not None and val_y is not None and len(val_y) > 0
    if val_y is not None:
        val_y = np.asarray(val_y, dtype=np.int64)

    rng = np.random.default_rng(config.seed)
    optimizer = Adam(model.parameters(), lr=config.lr)
    stopper = EarlyStopper(config.patience)
    best_weights: list[np.ndarray] | None = None
    history: list[dict] = []
    n = train_y.shape[0]

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            xb = train_x[batch]
            yb = train_y[batch]
            try:
                logits = model.forward(xb, training=True, rng=rng)
                loss, probs = T.softmax_cross_entropy(logits, yb)
            except NumericError as exc:
                raise NumericError(f"epoch {epoch}: {exc}") from exc
            if not np.isfinite(loss.data):
                raise NumericError(f"non-finite training loss at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.data) * yb.shape[0]
            epoch_correct += int((probs.argmax(axis=1) == yb).sum())

        row = {
            "epoch": epoch,
            "train_loss": epoch_loss / n,
            "train_acc": epoch_correct / n,
            "val_loss": None,
            "val_acc": None,
        }
        if has_val:
            val_loss, val_acc = _epoch_metrics(model, val_x, val_y, config.batch_size)
            if not np.isfinite(val_loss):
                raise NumericError(f"non-finite validation loss at epoch {epoch}")
            row["val_loss"] = val_loss
            row["val_acc"] = val_acc
            improved, should_stop = stopper.update(val_loss, epoch)
            if improved:
                best_weights = [p.data.copy() for p in model.parameters()]
            history.append(row)
            if should_stop:
                break
        else:
            history.append(row)

    if has_val and best_weights is not None:
        for p, w in zip(model.parameters(), best_weights):
            p.data[...] = w

    model.history = history
    model.provenance = dict(model.provenance)
    model.provenance.update(
        {
            "train_config": config.to_dict(),
            "epochs_run": len(history),
            "best_epoch": stopper.best_epoch if has_val else len(history) or None,
        }
    )
    return history


def history_csv(history: list[dict]) -> str:
    lines = ["epoch,train_loss,train_acc,val_loss,val_acc"]
    for row in history:
        val_loss = "" if row["val_loss"] is None else f"{row['val_loss']:.6f}"
        val_acc = "" if row["val_acc"] is None else f"{row['val_acc']:.6f}"
        lines.append(
            f"{row['epoch']},{row['train_loss']:.6f},{row['train_acc']:.6f},{val_loss},{val_acc}"
        )
    return "\n".join(lines) + "\n"
