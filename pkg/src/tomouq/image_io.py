"""Grayscale image files: binary PGM (8/16-bit), PNG previews, raw float64.

PGM payloads follow the netpbm convention (16-bit samples big-endian); raw
files are headerless little-endian float64, so the caller tracks the shape.
Values on disk are integer codes in ``[0, maxval]``; in memory images live in
``[0, 1]``.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import FormatError

__all__ = [
    "save_pgm",
    "load_pgm",
    "save_png_preview",
    "load_png",
    "save_raw_image",
    "load_raw_image",
]


def save_pgm(path, image: np.ndarray, bit_depth: int = 16) -> None:
    """Quantize an image in [0, 1] to an 8- or 16-bit binary PGM file."""
    if bit_depth not in (8, 16):
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    image = np.asarray(image, dtype=np.float64)
    maxval = 255 if bit_depth == 8 else 65535
    codes = np.rint(np.clip(image, 0.0, 1.0) * maxval)
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        if bit_depth == 8:
            fh.write(codes.astype(np.uint8).tobytes())
        else:
            fh.write(codes.astype(">u2").tobytes())


def _read_pgm_tokens(fh, count):
    """Next whitespace-separated header tokens, skipping '#' comments."""
    tokens = []
    while len(tokens) < count:
        line = fh.readline()
        if not line:
            raise FormatError("unexpected end of PGM header")
        text = line.split(b"#", 1)[0]
        tokens.extend(text.split())
    return tokens[:count]


def load_pgm(path) -> np.ndarray:
    """Read a binary PGM into a float image scaled to [0, 1]."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
        if magic != b"P5":
            raise FormatError(f"{path}: not a binary PGM (magic {magic!r})")
        width, height, maxval = (int(t) for t in _read_pgm_tokens(fh, 3))
        if maxval <= 0 or maxval > 65535:
            raise FormatError(f"{path}: unsupported maxval {maxval}")
        dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype(">u2")
        payload = fh.read(width * height * dtype.itemsize)
    if len(payload) != width * height * dtype.itemsize:
        raise FormatError(f"{path}: truncated pixel data")
    codes = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return codes.astype(np.float64) / maxval


def save_png_preview(path, image: np.ndarray) -> None:
    """8-bit grayscale PNG of an image in [0, 1]."""
    codes = np.rint(np.clip(np.asarray(image, float), 0.0, 1.0) * 255).astype(np.uint8)
    Image.fromarray(codes, mode="L").save(path, format="PNG")


def load_png(path) -> np.ndarray:
    """Read an 8- or 16-bit grayscale PNG scaled to [0, 1]; reject color images."""
    with Image.open(path) as img:
        if img.mode == "L":
            return np.asarray(img, dtype=np.float64) / 255.0
        if img.mode in ("I;16", "I"):
            data = np.asarray(img, dtype=np.float64)
            return data / 65535.0
        raise FormatError(f"{path}: expected grayscale, got mode {img.mode!r}")


def save_raw_image(path, image: np.ndarray) -> None:
    np.asarray(image, dtype=np.float64).astype("<f8").tofile(path)


def load_raw_image(path, shape: tuple[int, int]) -> np.ndarray:
    data = np.fromfile(path, dtype="<f8")
    if data.size != shape[0] * shape[1]:
        raise FormatError(f"{path}: expected {shape[0] * shape[1]} values, got {data.size}")
    return data.reshape(shape)
