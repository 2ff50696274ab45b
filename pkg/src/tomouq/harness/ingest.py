"""External grayscale images as reconstruction targets."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import FormatError
from ..image_io import load_pgm, load_png

__all__ = ["ingest_image", "bilinear_resample", "center_crop"]


def center_crop(image: np.ndarray, size: int) -> np.ndarray:
    """Largest centered ``size x size`` window (size capped at the short side)."""
    height, width = image.shape
    size = min(size, height, width)
    top = (height - size) // 2
    left = (width - size) // 2
    return image[top : top + size, left : left + size]


def bilinear_resample(image: np.ndarray, out_shape: tuple[int, int]) -> np.ndarray:
    """Bilinear interpolation at the output pixel centers (half-pixel convention)."""
    in_h, in_w = image.shape
    out_h, out_w = out_shape
    ys = (np.arange(out_h) + 0.5) * in_h / out_h - 0.5
    xs = (np.arange(out_w) + 0.5) * in_w / out_w - 0.5
    ys = np.clip(ys, 0, in_h - 1)
    xs = np.clip(xs, 0, in_w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, in_h - 1)
    x1 = np.minimum(x0 + 1, in_w - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]
    top = image[np.ix_(y0, x0)] * (1 - wx) + image[np.ix_(y0, x1)] * wx
    bottom = image[np.ix_(y1, x0)] * (1 - wx) + image[np.ix_(y1, x1)] * wx
    return top * (1 - wy) + bottom * wy


def ingest_image(path, target_size: int | None = None) -> np.ndarray:
    """Load an 8/16-bit grayscale PGM or PNG scaled to [0, 1].

    With ``target_size`` the image is center-cropped to a square and
    bilinearly resampled to ``target_size x target_size``; without it the
    native size is kept.

    Raises
    ------
    FormatError
        For unreadable files, color images, or unsupported formats.
    """
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        image = load_pgm(path)
    elif suffix == ".png":
        image = load_png(path)
    else:
        raise FormatError(f"{path}: unsupported image format {suffix!r} (want .pgm/.png)")
    if target_size is not None:
        image = center_crop(image, min(image.shape))
        if image.shape != (target_size, target_size):
            image = bilinear_resample(image, (target_size, target_size))
    return np.clip(image, 0.0, 1.0)
