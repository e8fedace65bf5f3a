"""Per-task image preprocessing: color conversion, bilinear resize,
scaling and normalization.

Output is always a float64 (C, H, W) array in [0,1] (before mean/std),
ready to wrap in a Tensor. Resizing uses corner-aligned bilinear sampling
and is the identity when the source already matches the target size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParseError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class PreprocessSpec:
    target_size: tuple[int, int]  # (H, W)
    color: str = "grayscale"  # "grayscale" | "rgb"
    mean: tuple[float, ...] | None = None
    std: tuple[float, ...] | None = None

    def __post_init__(self):
        h, w = self.target_size
        if h <= 0 or w <= 0:
            raise DimensionError(f"target_size must be positive, got {self.target_size}")
        if self.color not in ("grayscale", "rgb"):
            raise ParseError(f"color must be 'grayscale' or 'rgb', got {self.color!r}")
        if (self.mean is None) != (self.std is None):
            raise ParseError("mean and std must be provided together")
        if self.std is not None and any(s <= 0 for s in self.std):
            raise ParseError(f"std must be positive, got {self.std}")

    @property
    def channels(self) -> int:
        return 1 if self.color == "grayscale" else 3

    @property
    def input_shape(self) -> tuple[int, int, int]:
        return (self.channels, *self.target_size)

    def to_dict(self):
        return {
            "target_size": list(self.target_size),
            "color": self.color,
            "mean": list(self.mean) if self.mean is not None else None,
            "std": list(self.std) if self.std is not None else None,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            target_size=tuple(d["target_size"]),
            color=d["color"],
            mean=tuple(d["mean"]) if d.get("mean") is not None else None,
            std=tuple(d["std"]) if d.get("std") is not None else None,
        )


def to_grayscale(pixels):
    """Luma conversion 0.299 R + 0.587 G + 0.114 B; identity on 2-D input."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] == 3:
        r, g, b = GRAY_WEIGHTS
        return r * arr[:, :, 0] + g * arr[:, :, 1] + b * arr[:, :, 2]
    raise DimensionError(f"expected (H,W) or (H,W,3) pixels, got shape {arr.shape}")


def bilinear_resize(img, out_h, out_w):
    """Corner-aligned bilinear resize of a (H,W) or (H,W,C) float array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (2, 3):
        raise DimensionError(f"expected 2-D or 3-D image, got shape {arr.shape}")
    h, w = arr.shape[:2]
    if h < 1 or w < 1 or out_h < 1 or out_w < 1:
        raise DimensionError(f"degenerate resize {h}x{w} -> {out_h}x{out_w}")
    if (h, w) == (out_h, out_w):
        return arr.copy()

    src_r = np.linspace(0.0, h - 1.0, out_h) if out_h > 1 else np.zeros(1)
    src_c = np.linspace(0.0, w - 1.0, out_w) if out_w > 1 else np.zeros(1)
    r0 = np.floor(src_r).astype(int)
    c0 = np.floor(src_c).astype(int)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = (src_r - r0)[:, None]
    fc = (src_c - c0)[None, :]
    if arr.ndim == 3:
        fr = fr[..., None]
        fc = fc[..., None]

    top = arr[np.ix_(r0, c0)] * (1 - fc) + arr[np.ix_(r0, c1)] * fc
    bot = arr[np.ix_(r1, c0)] * (1 - fc) + arr[np.ix_(r1, c1)] * fc
    return top * (1 - fr) + bot * fr


def preprocess_pixels(pixels, spec: PreprocessSpec):
    """uint8 pixels -> float64 (C, H, W) tensor data per the spec."""
    arr = np.asarray(pixels)
    if arr.ndim not in (2, 3) or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"degenerate source image shape {arr.shape}")

    if spec.color == "grayscale":
        img = to_grayscale(arr)
    else:
        img = np.asarray(arr, dtype=np.float64)
        if img.ndim == 2:
            img = np.repeat(img[:, :, None], 3, axis=2)
        elif img.shape[2] != 3:
            raise DimensionError(f"expected 3-channel image, got shape {arr.shape}")

    h, w = spec.target_size
    img = bilinear_resize(img, h, w)
    img = img / 255.0

    if img.ndim == 2:
        chw = img[None, :, :]
    else:
        chw = img.transpose(2, 0, 1)

    if spec.mean is not None:
        mean = np.asarray(spec.mean, dtype=np.float64).reshape(-1, 1, 1)
        std = np.asarray(spec.std, dtype=np.float64).reshape(-1, 1, 1)
        if mean.shape[0] != chw.shape[0]:
            raise DimensionError(
                f"normalization has {mean.shape[0]} channels, image has {chw.shape[0]}"
            )
        chw = (chw - mean) / std
    return chw
