"""Decode and encode the image formats the datasets use.

Supported on disk: binary PGM (P5) and PPM (P6) with maxval 255, and 8-bit
non-interlaced PNG. PGM decodes to a (H, W) grayscale array; PPM and PNG
decode to (H, W, 3) RGB. All pixel values are uint8.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _read_netpbm(raw, path):
    magic = raw[:2]
    tokens = []
    pos = 2
    # header tokens: width, height, maxval; '#' starts a comment to EOL
    while len(tokens) < 3:
        if pos >= len(raw):
            raise FormatError(f"{path}: truncated netpbm header")
        ch = raw[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            eol = raw.find(b"\n", pos)
            pos = len(raw) if eol < 0 else eol + 1
        else:
            end = pos
            while end < len(raw) and raw[end : end + 1] not in b" \t\r\n":
                end += 1
            tokens.append(raw[pos:end])
            pos = end
    pos += 1  # single whitespace byte separates maxval from pixel data
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: non-numeric netpbm header") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    expected = width * height * channels
    data = raw[pos : pos + expected]
    if len(data) < expected:
        raise FormatError(f"{path}: truncated pixel data")
    arr = np.frombuffer(data, dtype=np.uint8)
    if channels == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, 3)


def _check_png_header(raw, path):
    if len(raw) < 33 or raw[12:16] != b"IHDR":
        raise FormatError(f"{path}: malformed PNG header")
    _, _, bit_depth, color_type, _, _, interlace = struct.unpack(">IIBBBBB", raw[16:29])
    if bit_depth != 8:
        raise FormatError(f"{path}: only 8-bit PNG supported, got bit depth {bit_depth}")
    if interlace != 0:
        raise FormatError(f"{path}: interlaced PNG not supported")
    return color_type


def decode_image(path):
    """Read an image file into a uint8 pixel array.

    Format is sniffed from magic bytes, not the file extension.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"{path}: cannot read image file: {exc}") from exc
    if raw[:2] in (b"P5", b"P6"):
        return _read_netpbm(raw, path)
    if raw[:8] == _PNG_SIGNATURE:
        _check_png_header(raw, path)
        try:
            img = Image.open(io.BytesIO(raw))
            img.load()
        except Exception as exc:
            raise FormatError(f"{path}: undecodable PNG: {exc}") from exc
        return np.asarray(img.convert("RGB"), dtype=np.uint8)
    raise FormatError(f"{path}: unsupported image format (need PGM P5, PPM P6 or PNG)")


def decode_image_bytes(raw, name="<bytes>"):
    """Same as :func:`decode_image` but from an in-memory buffer."""
    raw = bytes(raw)
    if raw[:2] in (b"P5", b"P6"):
        return _read_netpbm(raw, name)
    if raw[:8] == _PNG_SIGNATURE:
        _check_png_header(raw, name)
        try:
            img = Image.open(io.BytesIO(raw))
            img.load()
        except Exception as exc:
            raise FormatError(f"{name}: undecodable PNG: {exc}") from exc
        return np.asarray(img.convert("RGB"), dtype=np.uint8)
    raise FormatError(f"{name}: unsupported image format (need PGM P5, PPM P6 or PNG)")


def encode_pgm(arr):
    """Serialize a (H, W) uint8 array as binary PGM."""
    arr = np.asarray(arr, dtype=np.uint8)
    if arr.ndim != 2:
        raise FormatError(f"PGM requires a 2-D grayscale array, got shape {arr.shape}")
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + arr.tobytes()


def encode_ppm(arr):
    """Serialize a (H, W, 3) uint8 array as binary PPM."""
    arr = np.asarray(arr, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FormatError(f"PPM requires a (H, W, 3) RGB array, got shape {arr.shape}")
    h, w = arr.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + arr.tobytes()


def encode_png(arr):
    """Serialize a grayscale or RGB uint8 array as 8-bit PNG."""
    arr = np.asarray(arr, dtype=np.uint8)
    if arr.ndim == 2:
        img = Image.fromarray(arr, mode="L")
    elif arr.ndim == 3 and arr.shape[2] == 3:
        img = Image.fromarray(arr, mode="RGB")
    else:
        raise FormatError(f"PNG encoder needs (H,W) or (H,W,3) uint8, got shape {arr.shape}")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def write_image(path, arr):
    """Write ``arr`` choosing the container from the path suffix
    (.pgm / .ppm / .png)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        payload = encode_pgm(arr)
    elif suffix == ".ppm":
        payload = encode_ppm(arr)
    elif suffix == ".png":
        payload = encode_png(arr)
    else:
        raise FormatError(f"{path}: unsupported output suffix {suffix!r}")
    path.write_bytes(payload)
    return path
