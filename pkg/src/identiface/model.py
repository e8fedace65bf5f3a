"""VGG-16-style classifier: spec, construction, forward pass and prediction.

The reference configuration stacks 3x3 conv blocks
[64,64] [128,128] [256,256,256] [512,512,512] [512,512,512] with a 2x2 max
pool after each block, then one hidden dense layer (256) with dropout and
a dense output head. ``width_multiplier`` scales every conv width and the
hidden dense dim so small test models run in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .errors import DataError, FormatError, SpecError
from .metrics import EvalReport, make_report
from .preprocess import PreprocessSpec, preprocess_pixels

REFERENCE_BLOCKS = ((64, 64), (128, 128), (256, 256, 256), (512, 512, 512), (512, 512, 512))

# canonical label orders per task (index = class id)
GENDER_LABELS = ["female", "male"]
FACE_SHAPE_LABELS = ["oblong", "square", "round", "heart", "oval"]
FACE_SHAPE_3_LABELS = ["oblong", "square", "round"]
EMOTION_LABELS = ["neutral", "happy", "angry", "surprise", "sad"]
EMOTION_4_LABELS = ["neutral", "happy", "angry", "surprise"]

TASK_LABEL_MAPS = {
    "gender": GENDER_LABELS,
    "face_shape": FACE_SHAPE_LABELS,
    "emotion": EMOTION_LABELS,
}


def _scale_width(width: int, multiplier: float) -> int:
    return max(1, int(round(width * multiplier)))


def validate_label_map(task: str, classes: list[str]):
    """Enforce the canonical label orders for the soft-biometric tasks.

    gender is exactly [female, male]; face_shape and emotion must be a
    leading slice of their canonical order (3-class face shape, 4-class
    emotion). Recognition maps are free-form (subjects + "Other").
    """
    canon = TASK_LABEL_MAPS.get(task)
    if canon is None:
        return
    if task == "gender":
        if classes != canon:
            raise DataError(f"gender labels must be {canon} in that order, got {classes}")
        return
    if classes != canon[: len(classes)] or len(classes) < 2:
        raise DataError(
            f"{task} labels must be a leading slice of {canon}, got {classes}"
        )


@dataclass
class ModelSpec:
    task: str
    input_shape: tuple[int, int, int]  # (C, H, W)
    label_map: list[str]
    conv_blocks: tuple[tuple[int, ...], ...] = REFERENCE_BLOCKS
    width_multiplier: float = 1.0
    hidden_dim: int = 256
    dropout_rate: float = 0.5

    def __post_init__(self):
        c, h, w = self.input_shape
        if c not in (1, 3) or h < 1 or w < 1:
            raise SpecError(f"bad input shape {self.input_shape}")
        if not 0.0 < self.width_multiplier <= 1.0:
            raise SpecError(f"width_multiplier must be in (0, 1], got {self.width_multiplier}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise SpecError(f"dropout rate must be in [0, 1), got {self.dropout_rate}")
        if len(self.label_map) < 2:
            raise SpecError(f"need at least 2 classes, got {self.label_map}")
        if len(set(self.label_map)) != len(self.label_map):
            raise SpecError(f"duplicate labels in {self.label_map}")
        for h_or_w in self.spatial_trace():
            if h_or_w[0] < 1 or h_or_w[1] < 1:
                raise SpecError(
                    f"input {h}x{w} underflows after pooling: trace {self.spatial_trace()}"
                )

    def spatial_trace(self) -> list[tuple[int, int]]:
        """Spatial dims after each pool stage."""
        _, h, w = self.input_shape
        trace = []
        for _ in self.conv_blocks:
            h, w = h // 2, w // 2
            trace.append((h, w))
        return trace

    @property
    def scaled_blocks(self) -> tuple[tuple[int, ...], ...]:
        return tuple(
            tuple(_scale_width(c, self.width_multiplier) for c in block)
            for block in self.conv_blocks
        )

    @property
    def scaled_hidden(self) -> int:
        return _scale_width(self.hidden_dim, self.width_multiplier)

    @property
    def flat_dim(self) -> int:
        h, w = self.spatial_trace()[-1]
        return self.scaled_blocks[-1][-1] * h * w

    def parameter_shapes(self) -> list[tuple[str, tuple[int, ...]]]:
        """Name/shape of every parameter tensor in declaration order."""
        shapes: list[tuple[str, tuple[int, ...]]] = []
        in_ch = self.input_shape[0]
        for bi, block in enumerate(self.scaled_blocks):
            for li, out_ch in enumerate(block):
                shapes.append((f"conv{bi}_{li}.w", (out_ch, in_ch, 3, 3)))
                shapes.append((f"conv{bi}_{li}.b", (out_ch,)))
                in_ch = out_ch
        shapes.append(("dense_hidden.w", (self.flat_dim, self.scaled_hidden)))
        shapes.append(("dense_hidden.b", (self.scaled_hidden,)))
        shapes.append(("dense_out.w", (self.scaled_hidden, len(self.label_map))))
        shapes.append(("dense_out.b", (len(self.label_map),)))
        return shapes

    def to_dict(self):
        return {
            "task": self.task,
            "input_shape": list(self.input_shape),
            "label_map": list(self.label_map),
            "conv_blocks": [list(b) for b in self.conv_blocks],
            "width_multiplier": self.width_multiplier,
            "hidden_dim": self.hidden_dim,
            "dropout_rate": self.dropout_rate,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            task=d["task"],
            input_shape=tuple(d["input_shape"]),
            label_map=list(d["label_map"]),
            conv_blocks=tuple(tuple(b) for b in d["conv_blocks"]),
            width_multiplier=float(d["width_multiplier"]),
            hidden_dim=int(d["hidden_dim"]),
            dropout_rate=float(d["dropout_rate"]),
        )


def top2_from_probs(probs, label_map):
    """Two highest (label, percent) pairs; percents rounded to 0.1, exact
    ties listed lower class index first."""
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    return [(label_map[i], round(float(probs[i]) * 100.0, 1)) for i in order[:2]]


@dataclass
class PredictionResult:
    label: str
    label_index: int
    probabilities: np.ndarray
    top2: list[tuple[str, float]]


@dataclass
class VggClassifier:
    spec: ModelSpec
    preprocess: PreprocessSpec
    params: dict[str, T.Tensor]
    history: list[dict] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)
    kind: str = "vgg"

    @property
    def task(self) -> str:
        return self.spec.task

    @property
    def label_map(self) -> list[str]:
        return self.spec.label_map

    @property
    def needs_landmarks(self) -> bool:
        return False

    def parameters(self) -> list[T.Tensor]:
        return [self.params[name] for name, _ in self.spec.parameter_shapes()]

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x, training=False, rng=None) -> T.Tensor:
        """Batch (N,C,H,W) ndarray -> logits Tensor (N,K)."""
        node = x if isinstance(x, T.Tensor) else T.Tensor(x)
        for bi, block in enumerate(self.spec.scaled_blocks):
            for li in range(len(block)):
                node = T.conv2d(node, self.params[f"conv{bi}_{li}.w"],
                                self.params[f"conv{bi}_{li}.b"])
                node = T.relu(node)
            node = T.maxpool2d(node)
        node = T.flatten(node)
        node = T.dense(node, self.params["dense_hidden.w"], self.params["dense_hidden.b"])
        node = T.relu(node)
        node = T.dropout(node, self.spec.dropout_rate, rng=rng, training=training)
        return T.dense(node, self.params["dense_out.w"], self.params["dense_out.b"])

    def predict_batch(self, x) -> np.ndarray:
        """Inference-mode class probabilities for a (N,C,H,W) batch."""
        logits = self.forward(x, training=False)
        return T.softmax(logits.data)

    def predict_pixels(self, pixels) -> PredictionResult:
        """Classify one raw uint8 image (decoded pixels)."""
        x = preprocess_pixels(pixels, self.preprocess)[None, ...]
        probs = self.predict_batch(x)[0]
        idx = int(np.argmax(probs))
        return PredictionResult(
            label=self.spec.label_map[idx],
            label_index=idx,
            probabilities=probs,
            top2=top2_from_probs(probs, self.spec.label_map),
        )

    def evaluate_arrays(self, x, y, batch_size=64) -> EvalReport:
        y = np.asarray(y, dtype=np.int64)
        if y.size and (y.min() < 0 or y.max() >= len(self.spec.label_map)):
            raise DataError(f"labels outside the model's {len(self.spec.label_map)}-class map")
        preds = np.empty(y.shape[0], dtype=np.int64)
        for start in range(0, y.shape[0], batch_size):
            probs = self.predict_batch(x[start : start + batch_size])
            preds[start : start + batch_size] = probs.argmax(axis=1)
        return make_report(y, preds, self.spec.label_map)


def build_model(spec: ModelSpec, preprocess: PreprocessSpec | None = None,
                seed: int = 0) -> VggClassifier:
    """Allocate and He-initialize all parameters with a seeded generator."""
    if preprocess is None:
        color = "grayscale" if spec.input_shape[0] == 1 else "rgb"
        preprocess = PreprocessSpec(target_size=spec.input_shape[1:], color=color)
    if preprocess.input_shape != spec.input_shape:
        raise SpecError(
            f"preprocess produces {preprocess.input_shape}, model expects {spec.input_shape}"
        )
    rng = np.random.default_rng(seed)
    params: dict[str, T.Tensor] = {}
    for name, shape in spec.parameter_shapes():
        if name.endswith(".b"):
            data = np.zeros(shape)
        elif name.startswith("conv"):
            data = T.he_normal(rng, shape, fan_in=shape[1] * 9)
        else:
            data = T.he_normal(rng, shape, fan_in=shape[0])
        params[name] = T.Tensor(data, requires_grad=True)
    return VggClassifier(spec=spec, preprocess=preprocess, params=params,
                         provenance={"init_seed": seed})


def check_weight_shapes(spec: ModelSpec, tensors: dict[str, np.ndarray]):
    """Raise FormatError when stored tensors disagree with the spec."""
    expected = spec.parameter_shapes()
    if set(tensors) != {name for name, _ in expected}:
        raise FormatError("stored tensor names do not match the model spec")
    for name, shape in expected:
        if tuple(tensors[name].shape) != tuple(shape):
            raise FormatError(
                f"tensor {name} has shape {tuple(tensors[name].shape)}, spec requires {shape}"
            )
