"""Multiclass linear SVM: one-vs-rest heads trained with Pegasos-style
subgradient steps on the full-batch hinge objective.

Each head minimizes  lambda/2 ||w||^2 + mean_i hinge(y_i (w.x_i + b)).
The bias rides along as an appended constant feature (so it is lightly
regularized too), steps use eta_t = 1/(lambda t) with projection onto the
ball of radius 1/sqrt(lambda), and the full-batch subgradient makes the
trajectory invariant to duplicating the training set. A head that somehow
ends worse than the zero model is replaced by the zero model, so the final
objective never exceeds the trivial one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneracyError, DimensionError, NumericError

DEFAULT_LAMBDA = 1e-4
DEFAULT_EPOCHS = 200


@dataclass
class SvmModel:
    weights: np.ndarray  # (K, D)
    biases: np.ndarray  # (K,)
    classes: list[str]
    feature_family: str = "landmarks_68"
    lam: float = DEFAULT_LAMBDA
    provenance: dict = field(default_factory=dict)

    def scores(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.weights.shape[1]:
            raise DimensionError(
                f"feature dim {x.shape[-1]} does not match model dim {self.weights.shape[1]}"
            )
        return x @ self.weights.T + self.biases


def hinge_objective(w, b, x, y_signed, lam):
    """lambda/2 ||w||^2 + mean hinge for one binary head."""
    margins = y_signed * (x @ w + b)
    return 0.5 * lam * float(w @ w) + float(np.maximum(0.0, 1.0 - margins).mean())


def _train_head(x1, y_signed, lam, epochs):
    """Pegasos on the augmented matrix x1 (constant-1 column appended)."""
    d = x1.shape[1]
    w = np.zeros(d)
    radius = 1.0 / np.sqrt(lam)
    for t in range(1, epochs + 1):
        margins = y_signed * (x1 @ w)
        active = margins < 1.0
        grad = lam * w
        if active.any():
            grad = grad - (y_signed[active, None] * x1[active]).sum(axis=0) / x1.shape[0]
        w = w - grad / (lam * t)
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w *= radius / norm
    return w


def svm_train(x, y, classes, lam=DEFAULT_LAMBDA, epochs=DEFAULT_EPOCHS, seed=0,
              feature_family="landmarks_68") -> SvmModel:
    """Train one-vs-rest heads. Deterministic for a fixed seed."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionError(f"expected X (N,D) with y (N,), got {x.shape} and {y.shape}")
    if not np.isfinite(x).all():
        raise NumericError("feature matrix contains non-finite values")
    k = len(classes)
    if k < 2:
        raise DegeneracyError(f"need at least 2 classes, got {k}")
    present = np.unique(y)
    missing = [classes[i] for i in range(k) if i not in present]
    if missing:
        raise DegeneracyError(f"classes without samples: {missing}")

    x1 = np.hstack([x, np.ones((x.shape[0], 1))])
    weights = np.zeros((k, x.shape[1]))
    biases = np.zeros(k)
    for class_idx in range(k):
        y_signed = np.where(y == class_idx, 1.0, -1.0)
        w_aug = _train_head(x1, y_signed, lam, epochs)
        w, b = w_aug[:-1], float(w_aug[-1])
        # never worse than the trivial zero head
        if hinge_objective(w, b, x, y_signed, lam) > hinge_objective(
            np.zeros(x.shape[1]), 0.0, x, y_signed, lam
        ):
            w, b = np.zeros(x.shape[1]), 0.0
        weights[class_idx] = w
        biases[class_idx] = b

    return SvmModel(weights=weights, biases=biases, classes=list(classes), lam=lam,
                    feature_family=feature_family,
                    provenance={"lambda": lam, "epochs": epochs, "seed": seed})


def svm_predict(model: SvmModel, x):
    """Predicted label index plus per-class scores; ties go to the lowest index."""
    scores = model.scores(np.asarray(x, dtype=np.float64).reshape(-1))
    return int(np.argmax(scores)), scores


def svm_predict_batch(model: SvmModel, x):
    scores = model.scores(np.asarray(x, dtype=np.float64))
    return scores.argmax(axis=1), scores


@dataclass
class SvmClassifier:
    """SVM with the same prediction surface as the CNN classifiers.

    Scores are mapped through softmax for display only; the predicted label
    is the raw argmax.
    """

    model: SvmModel
    task: str
    preprocess: "PreprocessSpec"
    history: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    kind: str = "svm"

    @property
    def label_map(self) -> list[str]:
        return self.model.classes

    @property
    def needs_landmarks(self) -> bool:
        return self.model.feature_family == "landmarks_68"

    def _prepare_gray(self, pixels) -> np.ndarray:
        from .preprocess import bilinear_resize, to_grayscale

        gray = to_grayscale(pixels)
        h, w = self.preprocess.target_size
        return bilinear_resize(gray, h, w)

    def features_from_pixels(self, pixels) -> np.ndarray:
        from .features import extract_features

        if self.needs_landmarks:
            raise DimensionError(
                "landmarks_68 models classify landmark files, not raw pixels"
            )
        return extract_features(self.model.feature_family, image=self._prepare_gray(pixels))

    def predict_features(self, vec) -> "PredictionResult":
        from .model import PredictionResult, top2_from_probs
        from .tensor import softmax

        idx, scores = svm_predict(self.model, vec)
        probs = softmax(scores)
        return PredictionResult(
            label=self.model.classes[idx],
            label_index=idx,
            probabilities=probs,
            top2=top2_from_probs(probs, self.model.classes),
        )

    def predict_pixels(self, pixels) -> "PredictionResult":
        return self.predict_features(self.features_from_pixels(pixels))

    def predict_landmarks(self, points) -> "PredictionResult":
        from .features import landmark_features

        return self.predict_features(landmark_features(points))
