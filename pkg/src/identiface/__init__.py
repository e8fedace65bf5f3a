"""identiface: multimodal facial biometric engine.

Four VGG-16-style classifiers (identity, gender, face shape, emotion) plus
classical-feature SVM baselines, with dataset balancing, training with
early stopping, evaluation reports, a unified model file format, a CLI and
an HTTP inference service.
"""

__version__ = "0.1.0"

from .errors import IdentifaceError
from .manifest import DatasetManifest, ImageSample, load_manifest, save_manifest
from .metrics import EvalReport, confusion_matrix, make_report
from .model import ModelSpec, VggClassifier, build_model
from .modelio import load_model, save_model
from .preprocess import PreprocessSpec
from .svm import SvmClassifier, SvmModel, svm_predict, svm_train
from .tensor import Tensor
from .train import EarlyStopper, TrainConfig, train

__all__ = [
    "__version__",
    "IdentifaceError",
    "DatasetManifest",
    "ImageSample",
    "load_manifest",
    "save_manifest",
    "EvalReport",
    "confusion_matrix",
    "make_report",
    "ModelSpec",
    "VggClassifier",
    "build_model",
    "load_model",
    "save_model",
    "PreprocessSpec",
    "SvmClassifier",
    "SvmModel",
    "svm_predict",
    "svm_train",
    "Tensor",
    "EarlyStopper",
    "TrainConfig",
    "train",
]
