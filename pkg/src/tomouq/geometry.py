"""Parallel-beam acquisition geometry.

Conventions used throughout the toolkit:

* Images are 2-D ``float64`` arrays of shape ``(height, width)``; row 0 is the
  top of the image.  Pixels are unit squares (pixel side = 1 length unit) and
  the physical frame is centered on the image: pixel ``(row, col)`` has center
  ``x = col - (width - 1)/2`` and ``y = (height - 1)/2 - row`` (y points up).
* A ray is the line ``x*cos(theta) + y*sin(theta) = r`` for view angle
  ``theta`` and detector offset ``r``.
* View angles are evenly spaced over ``[0, pi)`` with the first view at 0.
* Detector bins are centered on the rotation axis: bin ``k`` sits at offset
  ``(k - (n_detectors - 1)/2) * detector_spacing``.

The detector array must span the zero-padded image frame so every pixel
projects inside it for every view; ``default_padded_size`` returns the side
length of that frame (at least the grid diagonal, parity-matched to the image
so that axis-aligned rays pass through pixel centers rather than edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

__all__ = [
    "ProjectionGeometry",
    "default_padded_size",
    "geometry_for_image",
    "pixel_centers",
    "normalized_pixel_centers",
]


def default_padded_size(width: int, height: int) -> int:
    """Side length of the zero-padded frame for a ``width x height`` image.

    At least ``ceil(sqrt(2) * max(width, height))`` so the full diagonal fits,
    bumped by one if needed so that ``padded - max(width, height)`` is even.
    The parity rule keeps detector offsets aligned with pixel centers at unit
    spacing, which matters for axis-aligned views under the line-intersection
    ray model.
    """
    side = max(int(width), int(height))
    padded = math.ceil(math.sqrt(2.0) * side)
    if (padded - side) % 2 != 0:
        padded += 1
    return padded


@dataclass(frozen=True)
class ProjectionGeometry:
    """Sampling pattern of a parallel-beam scan.

    Parameters
    ----------
    n_views : int
        Number of view angles, evenly spaced over ``[0, pi)``.
    n_detectors : int
        Number of detector bins per view.
    detector_spacing : float
        Length units between adjacent detector bins (pixel side = 1).
    padded_size : int
        Side length of the zero-padded image frame the detectors span.
    """

    n_views: int
    n_detectors: int
    detector_spacing: float = 1.0
    padded_size: int = 0

    def __post_init__(self):
        if self.n_views < 1:
            raise GeometryError(f"n_views must be >= 1, got {self.n_views}")
        if self.n_detectors < 1:
            raise GeometryError(f"n_detectors must be >= 1, got {self.n_detectors}")
        if not (self.detector_spacing > 0):
            raise GeometryError(
                f"detector_spacing must be positive, got {self.detector_spacing}"
            )
        if self.padded_size < 1:
            raise GeometryError(f"padded_size must be >= 1, got {self.padded_size}")

    @property
    def n_rays(self) -> int:
        return self.n_views * self.n_detectors

    @property
    def angles(self) -> np.ndarray:
        """View angles in radians, shape ``(n_views,)``."""
        return np.arange(self.n_views) * (np.pi / self.n_views)

    @property
    def detector_offsets(self) -> np.ndarray:
        """Signed detector offsets from the rotation axis, shape ``(n_detectors,)``."""
        k = np.arange(self.n_detectors, dtype=np.float64)
        return (k - (self.n_detectors - 1) / 2.0) * self.detector_spacing

    def validate_for_image(self, image_shape: tuple[int, int]) -> None:
        """Raise ``GeometryError`` if an image of ``image_shape`` exceeds the padded frame."""
        height, width = image_shape
        if max(width, height) > self.padded_size:
            raise GeometryError(
                f"image {width}x{height} exceeds padded frame of side {self.padded_size}"
            )
        if self.padded_size < default_padded_size(width, height) - 1:
            # Allow the parity bump to be absent, but never a frame smaller
            # than the grid diagonal: corner pixels would miss the detectors.
            if self.padded_size < math.ceil(math.sqrt(2.0) * max(width, height)):
                raise GeometryError(
                    f"padded_size {self.padded_size} smaller than the grid diagonal "
                    f"of a {width}x{height} image"
                )


def geometry_for_image(
    width: int,
    height: int,
    n_views: int,
    n_detectors: int | None = None,
    detector_spacing: float = 1.0,
    padded_size: int | None = None,
) -> ProjectionGeometry:
    """Build a geometry whose detector array covers a ``width x height`` image."""
    if padded_size is None:
        padded_size = default_padded_size(width, height)
    if n_detectors is None:
        n_detectors = padded_size
    geom = ProjectionGeometry(
        n_views=n_views,
        n_detectors=n_detectors,
        detector_spacing=detector_spacing,
        padded_size=padded_size,
    )
    geom.validate_for_image((height, width))
    return geom


def pixel_centers(image_shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """Physical (x, y) coordinates of all pixel centers, each flattened row-major."""
    height, width = image_shape
    xs = np.arange(width, dtype=np.float64) - (width - 1) / 2.0
    ys = (height - 1) / 2.0 - np.arange(height, dtype=np.float64)
    X, Y = np.meshgrid(xs, ys)
    return X.ravel(), Y.ravel()


def normalized_pixel_centers(image_shape: tuple[int, int]) -> np.ndarray:
    """Pixel centers mapped into the unit square, shape ``(height*width, 2)``.

    Column 0 is x in ``(0, 1)`` increasing left to right, column 1 is y
    increasing top to bottom; these are the coordinate-network inputs.
    """
    height, width = image_shape
    xs = (np.arange(width, dtype=np.float64) + 0.5) / width
    ys = (np.arange(height, dtype=np.float64) + 0.5) / height
    X, Y = np.meshgrid(xs, ys)
    return np.column_stack([X.ravel(), Y.ravel()])
