"""Classical feature families for the SVM baselines.

Four fixed-length families:

* ``face_raw`` — flattened normalized 48x48 crop (2304 values)
* ``landmarks_68`` — centroid-centered, inter-ocular-normalized 68 points
  (136 values)
* ``lbp`` — uniform LBP(8,1) histogram, 58 uniform bins + 1 other (59)
* ``gabor`` — 5 wavelengths × 8 orientations, (mean, std) of |response|
  per filter (80 values)
"""

from __future__ import annotations

import math
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.signal import convolve2d

from .errors import DegeneracyError, DimensionError, ParseError

FEATURE_FAMILIES = ("face_raw", "landmarks_68", "lbp", "gabor")
FEATURE_DIMS = {"face_raw": 2304, "landmarks_68": 136, "lbp": 59, "gabor": 80}

FACE_SIZE = 48

# dlib convention: points 36-41 are the right eye, 42-47 the left eye
RIGHT_EYE = slice(36, 42)
LEFT_EYE = slice(42, 48)

GABOR_WAVELENGTHS = (4.0, 4.0 * math.sqrt(2.0), 8.0, 8.0 * math.sqrt(2.0), 16.0)
GABOR_ORIENTATIONS = tuple(k * math.pi / 8.0 for k in range(8))
GABOR_SIGMA_RATIO = 0.56
GABOR_GAMMA = 0.5


def face_raw_features(image):
    """Row-major flatten of a 48x48 grayscale crop, scaled to [0,1]."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.shape != (FACE_SIZE, FACE_SIZE):
        raise DimensionError(f"face_raw expects {FACE_SIZE}x{FACE_SIZE} grayscale, "
                             f"got shape {arr.shape}")
    return (arr / 255.0).reshape(-1)


def load_landmarks(path) -> np.ndarray:
    """Read a 68-line `index x y` landmark file into a (68, 2) array."""
    path = Path(path)
    try:
        lines = [l for l in path.read_text(encoding="utf-8").splitlines() if l.strip()]
    except OSError as exc:
        raise ParseError(f"{path}: cannot read landmarks: {exc}") from exc
    if len(lines) != 68:
        raise ParseError(f"{path}: expected 68 landmark lines, got {len(lines)}")
    points = np.zeros((68, 2), dtype=np.float64)
    seen = set()
    for lineno, line in enumerate(lines, start=1):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 'index x y', got {line!r}")
        try:
            idx = int(parts[0])
            x, y = float(parts[1]), float(parts[2])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric landmark line {line!r}") from None
        if not 0 <= idx < 68 or idx in seen:
            raise ParseError(f"{path}:{lineno}: bad or duplicate landmark index {idx}")
        seen.add(idx)
        points[idx] = (x, y)
    return points


def landmark_features(points):
    """Translation/scale-invariant landmark vector.

    Subtracts the centroid of all 68 points and divides by the inter-ocular
    distance (right-eye centroid to left-eye centroid), then flattens as
    (x0, y0, ..., x67, y67).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape != (68, 2):
        raise DimensionError(f"expected (68, 2) landmarks, got shape {pts.shape}")
    if not np.isfinite(pts).all():
        raise DegeneracyError("landmarks contain non-finite coordinates")
    right = pts[RIGHT_EYE].mean(axis=0)
    left = pts[LEFT_EYE].mean(axis=0)
    iod = float(np.linalg.norm(left - right))
    if iod <= 1e-12:
        raise DegeneracyError("zero inter-ocular distance")
    centered = pts - pts.mean(axis=0)
    return (centered / iod).reshape(-1)


# ---------------------------------------------------------------------------
# LBP
# ---------------------------------------------------------------------------

# 8 neighbors clockwise from top-left; neighbor i contributes bit 2**i
_LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def _transitions(code: int) -> int:
    bits = [(code >> i) & 1 for i in range(8)]
    return sum(bits[i] != bits[(i + 1) % 8] for i in range(8))


@lru_cache(maxsize=1)
def _uniform_bin_map() -> np.ndarray:
    """code -> histogram bin; uniform codes ascending get 0..57, rest -> 58."""
    uniform = [c for c in range(256) if _transitions(c) <= 2]
    assert len(uniform) == 58
    table = np.full(256, 58, dtype=np.int64)
    for bin_idx, code in enumerate(uniform):
        table[code] = bin_idx
    return table


def lbp_codes(image) -> np.ndarray:
    """Per-interior-pixel LBP code, bit set when neighbor >= center."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 3 or arr.shape[1] < 3:
        raise DimensionError(f"LBP needs a grayscale image of at least 3x3, got {arr.shape}")
    center = arr[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    for bit, (dr, dc) in enumerate(_LBP_OFFSETS):
        neighbor = arr[1 + dr : arr.shape[0] - 1 + dr, 1 + dc : arr.shape[1] - 1 + dc]
        codes |= (neighbor >= center).astype(np.int64) << bit
    return codes


def lbp_features(image):
    """L1-normalized 59-bin uniform-pattern histogram."""
    codes = lbp_codes(image)
    bins = _uniform_bin_map()[codes.reshape(-1)]
    hist = np.bincount(bins, minlength=59).astype(np.float64)
    return hist / hist.sum()


# ---------------------------------------------------------------------------
# Gabor
# ---------------------------------------------------------------------------

def gabor_kernel(wavelength: float, orientation: float) -> np.ndarray:
    """Real (cosine) Gabor kernel, mean-subtracted so it has zero DC response.

    sigma = 0.56 * wavelength, spatial aspect gamma = 0.5, support radius
    ceil(2.5 * sigma).
    """
    sigma = GABOR_SIGMA_RATIO * wavelength
    radius = int(math.ceil(2.5 * sigma))
    y, x = np.mgrid[-radius : radius + 1, -radius : radius + 1].astype(np.float64)
    xr = x * math.cos(orientation) + y * math.sin(orientation)
    yr = -x * math.sin(orientation) + y * math.cos(orientation)
    envelope = np.exp(-(xr**2 + (GABOR_GAMMA * yr) ** 2) / (2.0 * sigma**2))
    carrier = np.cos(2.0 * math.pi * xr / wavelength)
    kernel = envelope * carrier
    return kernel - kernel.mean()


@lru_cache(maxsize=1)
def gabor_bank() -> tuple:
    """All 40 kernels ordered wavelength-major, orientation-minor."""
    return tuple(
        gabor_kernel(lam, theta) for lam in GABOR_WAVELENGTHS for theta in GABOR_ORIENTATIONS
    )


def gabor_response(image, kernel) -> np.ndarray:
    """Same-size filtering with symmetric boundary handling (keeps constant
    images constant, so zero-DC kernels give ~0 response)."""
    return convolve2d(image, kernel, mode="same", boundary="symm")


def gabor_features(image):
    """(mean |response|, std |response|) for each of the 40 bank filters."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.shape != (FACE_SIZE, FACE_SIZE):
        raise DimensionError(f"gabor expects {FACE_SIZE}x{FACE_SIZE} grayscale, "
                             f"got shape {arr.shape}")
    scaled = arr / 255.0
    values = np.empty(len(GABOR_WAVELENGTHS) * len(GABOR_ORIENTATIONS) * 2)
    for i, kernel in enumerate(gabor_bank()):
        magnitude = np.abs(gabor_response(scaled, kernel))
        values[2 * i] = magnitude.mean()
        values[2 * i + 1] = magnitude.std()
    return values


def extract_features(family: str, image=None, landmarks=None):
    """Dispatch a feature family on pixel and/or landmark input."""
    if family == "face_raw":
        return face_raw_features(image)
    if family == "lbp":
        return lbp_features(image)
    if family == "gabor":
        return gabor_features(image)
    if family == "landmarks_68":
        if landmarks is None:
            raise DimensionError("landmarks_68 features require a landmark set")
        return landmark_features(landmarks)
    raise DimensionError(f"unknown feature family {family!r}")
