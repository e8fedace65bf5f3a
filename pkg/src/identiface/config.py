"""key=value config files for training runs and the inference service.

Lines are ``key=value``; blank lines and ``#`` comments are ignored.
Training example::

    task=face_shape
    model=vgg
    input=1x64x64
    width_multiplier=0.25
    lr=0.0001
    batch_size=32
    test_size=0.2
    epochs=30
    patience=7
    split=random_stratified

Service example::

    port=8420
    model.emotion=models/emotion.idfc
    model.gender=models/gender.idfc
    max_request_bytes=4194304
    frame_rate_cap=4
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, RangeError
from .manifest import TASKS
from .model import REFERENCE_BLOCKS, ModelSpec
from .preprocess import PreprocessSpec
from .train import TrainConfig

DEFAULT_PORT = 8420
DEFAULT_MAX_REQUEST_BYTES = 4 * 1024 * 1024
DEFAULT_FRAME_RATE_CAP = 4


def read_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read config: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ParseError(f"{path}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def _get(cfg, key, default=None, convert=str):
    if key not in cfg:
        if default is None and convert is not str:
            return None
        return default
    try:
        return convert(cfg[key])
    except ValueError:
        raise ParseError(f"config key {key}={cfg[key]!r} is not a valid {convert.__name__}") from None


def _parse_shape(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise ValueError(text)
    c, h, w = (int(p) for p in parts)
    return c, h, w


def _parse_blocks(text: str) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(v) for v in block.split(",")) for block in text.split("|"))


@dataclass
class TrainSettings:
    """Everything the `train` subcommand needs beyond the manifest."""

    task: str
    model_kind: str  # "vgg" | "svm"
    train: TrainConfig
    split_policy: str = "random_stratified"
    input_shape: tuple[int, int, int] = (1, 48, 48)
    conv_blocks: tuple[tuple[int, ...], ...] = REFERENCE_BLOCKS
    width_multiplier: float = 1.0
    hidden_dim: int = 256
    dropout_rate: float = 0.5
    mean: tuple[float, ...] | None = None
    std: tuple[float, ...] | None = None
    feature_family: str = "landmarks_68"
    svm_lambda: float = 1e-4

    def preprocess_spec(self) -> PreprocessSpec:
        color = "grayscale" if self.input_shape[0] == 1 else "rgb"
        return PreprocessSpec(target_size=self.input_shape[1:], color=color,
                              mean=self.mean, std=self.std)

    def model_spec(self, label_map: list[str]) -> ModelSpec:
        return ModelSpec(
            task=self.task,
            input_shape=self.input_shape,
            label_map=label_map,
            conv_blocks=self.conv_blocks,
            width_multiplier=self.width_multiplier,
            hidden_dim=self.hidden_dim,
            dropout_rate=self.dropout_rate,
        )


def train_settings_from_config(cfg: dict[str, str], seed_override=None) -> TrainSettings:
    task = _get(cfg, "task")
    if task not in TASKS:
        raise ParseError(f"config task must be one of {TASKS}, got {task!r}")
    model_kind = _get(cfg, "model", "vgg")
    if model_kind not in ("vgg", "svm"):
        raise ParseError(f"config model must be 'vgg' or 'svm', got {model_kind!r}")
    seed = seed_override if seed_override is not None else _get(cfg, "seed", 0, int)
    patience_raw = cfg.get("patience", "").strip().lower()
    train = TrainConfig(
        lr=_get(cfg, "lr", 1e-4, float),
        batch_size=_get(cfg, "batch_size", 32, int),
        test_size=_get(cfg, "test_size", 0.2, float),
        epochs=_get(cfg, "epochs", 100, int),
        patience=None if patience_raw in ("", "none") else _get(cfg, "patience", None, int),
        seed=seed,
    )
    split_policy = _get(cfg, "split", "random_stratified")
    if split_policy not in ("random_stratified", "subject_disjoint"):
        raise ParseError(f"unknown split policy {split_policy!r}")

    def floats(text):
        return tuple(float(v) for v in text.split(","))

    return TrainSettings(
        task=task,
        model_kind=model_kind,
        train=train,
        split_policy=split_policy,
        input_shape=_get(cfg, "input", (1, 48, 48), _parse_shape),
        conv_blocks=_get(cfg, "blocks", REFERENCE_BLOCKS, _parse_blocks),
        width_multiplier=_get(cfg, "width_multiplier", 1.0, float),
        hidden_dim=_get(cfg, "hidden_dim", 256, int),
        dropout_rate=_get(cfg, "dropout", 0.5, float),
        mean=_get(cfg, "mean", None, floats),
        std=_get(cfg, "std", None, floats),
        feature_family=_get(cfg, "feature_family", "landmarks_68"),
        svm_lambda=_get(cfg, "lambda", 1e-4, float),
    )


@dataclass
class ServiceConfig:
    model_paths: dict[str, str]
    port: int = DEFAULT_PORT
    max_request_bytes: int = DEFAULT_MAX_REQUEST_BYTES
    frame_rate_cap: int = DEFAULT_FRAME_RATE_CAP
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if not self.model_paths:
            raise RangeError("service config must configure at least one model")
        unknown = sorted(set(self.model_paths) - set(TASKS))
        if unknown:
            raise RangeError(f"unknown tasks in service config: {unknown}")
        if not 0 < self.port < 65536:
            raise RangeError(f"invalid port {self.port}")
        if self.frame_rate_cap < 1:
            raise RangeError(f"frame rate cap must be >= 1, got {self.frame_rate_cap}")
        if self.max_request_bytes < 1:
            raise RangeError(f"max_request_bytes must be >= 1, got {self.max_request_bytes}")

    def resolve(self, task: str) -> Path:
        return self.base_dir / self.model_paths[task]


def service_config_from_file(path, port_override=None) -> ServiceConfig:
    path = Path(path)
    cfg = read_config(path)
    models = {
        key[len("model."):]: value
        for key, value in cfg.items()
        if key.startswith("model.")
    }
    return ServiceConfig(
        model_paths=models,
        port=port_override or _get(cfg, "port", DEFAULT_PORT, int),
        max_request_bytes=_get(cfg, "max_request_bytes", DEFAULT_MAX_REQUEST_BYTES, int),
        frame_rate_cap=_get(cfg, "frame_rate_cap", DEFAULT_FRAME_RATE_CAP, int),
        base_dir=path.parent,
    )
