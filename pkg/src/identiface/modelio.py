"""Unified model persistence.

File layout::

    magic   b"IDFC"
    version uint32 LE (currently 1)
    hlen    uint32 LE
    header  hlen bytes of UTF-8 JSON (canonical: sorted keys, no spaces)
    payload concatenated little-endian float32 tensors, declaration order

The header carries kind ("vgg" | "svm"), task, label_map, preprocess,
provenance, the architecture/solver description and a tensor name/shape
table. Loading validates magic, version, header/spec consistency and exact
payload length; a failed load never returns a partial model. Weights are
stored float32, so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .model import ModelSpec, VggClassifier, build_model, check_weight_shapes
from .preprocess import PreprocessSpec
from .svm import SvmClassifier, SvmModel
from .tensor import Tensor

MAGIC = b"IDFC"
VERSION = 1


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _header_and_tensors(model) -> tuple[dict, list[np.ndarray]]:
    if isinstance(model, VggClassifier):
        names_shapes = model.spec.parameter_shapes()
        tensors = [model.params[name].data for name, _ in names_shapes]
        header = {
            "kind": "vgg",
            "task": model.spec.task,
            "label_map": list(model.spec.label_map),
            "preprocess": model.preprocess.to_dict(),
            "spec": model.spec.to_dict(),
            "provenance": model.provenance,
            "tensors": [{"name": n, "shape": list(s)} for n, s in names_shapes],
        }
        return header, tensors
    if isinstance(model, SvmClassifier):
        svm = model.model
        header = {
            "kind": "svm",
            "task": model.task,
            "label_map": list(svm.classes),
            "preprocess": model.preprocess.to_dict(),
            "svm": {"feature_family": svm.feature_family, "lambda": svm.lam},
            "provenance": model.provenance,
            "tensors": [
                {"name": "weights", "shape": list(svm.weights.shape)},
                {"name": "biases", "shape": list(svm.biases.shape)},
            ],
        }
        return header, [svm.weights, svm.biases]
    raise FormatError(f"cannot persist object of type {type(model).__name__}")


def save_model(model, path) -> Path:
    header, tensors = _header_and_tensors(model)
    blob = _canonical_json(header)
    parts = [MAGIC, struct.pack("<II", VERSION, len(blob)), blob]
    parts += [np.ascontiguousarray(t, dtype="<f4").tobytes() for t in tensors]
    path = Path(path)
    path.write_bytes(b"".join(parts))
    return path


def _read_exact(buf: bytes, offset: int, count: int, what: str) -> bytes:
    if offset + count > len(buf):
        raise FormatError(f"truncated model file while reading {what}")
    return buf[offset : offset + count]


def load_model(path):
    """Load a persisted model; returns a VggClassifier or SvmClassifier."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read model file: {exc}") from exc

    if _read_exact(raw, 0, 4, "magic") != MAGIC:
        raise FormatError(f"{path}: bad magic, not a model file")
    version, hlen = struct.unpack("<II", _read_exact(raw, 4, 8, "version/header length"))
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version} (expected {VERSION})")
    try:
        header = json.loads(_read_exact(raw, 12, hlen, "header").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: corrupt JSON header: {exc}") from exc

    for key in ("kind", "task", "label_map", "preprocess", "tensors"):
        if key not in header:
            raise FormatError(f"{path}: header missing key {key!r}")

    offset = 12 + hlen
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(int(v) for v in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        chunk = _read_exact(raw, offset, 4 * count, f"tensor {entry['name']}")
        offset += 4 * count
        tensors[entry["name"]] = np.frombuffer(chunk, dtype="<f4").reshape(shape)
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} trailing bytes after tensor payload")

    preprocess = PreprocessSpec.from_dict(header["preprocess"])
    provenance = header.get("provenance", {})

    if header["kind"] == "vgg":
        spec = ModelSpec.from_dict(header["spec"])
        if spec.label_map != list(header["label_map"]):
            raise FormatError(f"{path}: header label_map disagrees with model spec")
        check_weight_shapes(spec, tensors)
        model = build_model(spec, preprocess, seed=0)
        for name, _ in spec.parameter_shapes():
            model.params[name] = Tensor(tensors[name].astype(np.float32), requires_grad=True)
        model.provenance = provenance
        return model

    if header["kind"] == "svm":
        weights = tensors.get("weights")
        biases = tensors.get("biases")
        if weights is None or biases is None or weights.ndim != 2 or biases.ndim != 1:
            raise FormatError(f"{path}: svm models need 2-D weights and 1-D biases")
        label_map = list(header["label_map"])
        if weights.shape[0] != len(label_map) or biases.shape[0] != len(label_map):
            raise FormatError(
                f"{path}: header claims {len(label_map)} classes but weights are "
                f"{weights.shape[0]}-row"
            )
        svm = SvmModel(
            weights=weights.astype(np.float32),
            biases=biases.astype(np.float32),
            classes=label_map,
            feature_family=header["svm"]["feature_family"],
            lam=float(header["svm"]["lambda"]),
        )
        return SvmClassifier(model=svm, task=header["task"], preprocess=preprocess,
                             provenance=provenance)

    raise FormatError(f"{path}: unknown model kind {header['kind']!r}")
