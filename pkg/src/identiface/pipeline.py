"""Dataset assembly and whole-model evaluation over manifests."""

from __future__ import annotations

import numpy as np

from .errors import DataError
from .features import extract_features, load_landmarks
from .imageio import decode_image
from .manifest import DatasetManifest, ImageSample
from .metrics import EvalReport, make_report
from .model import PredictionResult, VggClassifier
from .preprocess import PreprocessSpec, preprocess_pixels
from .svm import SvmClassifier


def load_arrays(manifest: DatasetManifest, entries: list[ImageSample],
                spec: PreprocessSpec) -> tuple[np.ndarray, np.ndarray]:
    """Decode + preprocess entries into a (N,C,H,W) batch and label vector."""
    if not entries:
        raise DataError("no entries to load")
    xs = np.stack([
        preprocess_pixels(decode_image(manifest.resolve_path(s)), spec) for s in entries
    ])
    ys = np.array([s.label for s in entries], dtype=np.int64)
    return xs, ys


def load_feature_matrix(manifest: DatasetManifest, entries: list[ImageSample],
                        classifier: SvmClassifier) -> tuple[np.ndarray, np.ndarray]:
    """Extract the classifier's feature family for every entry."""
    if not entries:
        raise DataError("no entries to load")
    rows = []
    for sample in entries:
        if classifier.needs_landmarks:
            lm_path = manifest.resolve_landmarks(sample)
            if lm_path is None:
                raise DataError(f"entry {sample.path} has no landmarks_path, required "
                                "by a landmarks_68 model")
            rows.append(extract_features("landmarks_68", landmarks=load_landmarks(lm_path)))
        else:
            pixels = decode_image(manifest.resolve_path(sample))
            rows.append(classifier.features_from_pixels(pixels))
    ys = np.array([s.label for s in entries], dtype=np.int64)
    return np.stack(rows), ys


def evaluate_on_manifest(classifier, manifest: DatasetManifest,
                         entries: list[ImageSample] | None = None) -> EvalReport:
    """Run a loaded model over manifest entries and build an EvalReport."""
    entries = manifest.entries if entries is None else entries
    if not entries:
        raise DataError("no entries to evaluate")
    if manifest.classes != classifier.label_map:
        raise DataError(
            f"manifest classes {manifest.classes} do not match model labels "
            f"{classifier.label_map}"
        )
    if isinstance(classifier, VggClassifier):
        x, y = load_arrays(manifest, entries, classifier.preprocess)
        return classifier.evaluate_arrays(x, y)
    x, y = load_feature_matrix(manifest, entries, classifier)
    from .svm import svm_predict_batch

    preds, _ = svm_predict_batch(classifier.model, x)
    return make_report(y, preds, classifier.label_map)


def predict_file(classifier, image_path, landmarks_path=None) -> PredictionResult:
    """Classify a single image (or landmark) file with a loaded model."""
    if getattr(classifier, "needs_landmarks", False):
        if landmarks_path is None:
            raise DataError("this model classifies 68-point landmark files; pass one")
        return classifier.predict_landmarks(load_landmarks(landmarks_path))
    return classifier.predict_pixels(decode_image(image_path))
