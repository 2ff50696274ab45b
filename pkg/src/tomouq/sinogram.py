"""Sinogram container, measurement noise, and raw-file round-tripping."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, FormatError, ShapeError
from .geometry import ProjectionGeometry

__all__ = ["Sinogram", "add_noise", "save_sinogram", "load_sinogram"]

_MAGIC = b"SINO"


@dataclass
class Sinogram:
    """Projection measurements on a ``(n_views, n_detectors)`` grid.

    ``noise_sigma2`` records the variance of injected Gaussian noise (None for
    clean data); downstream likelihood models reuse it as the measurement
    noise variance.
    """

    geometry: ProjectionGeometry
    values: np.ndarray
    noise_sigma2: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        expected = (self.geometry.n_views, self.geometry.n_detectors)
        if self.values.shape != expected:
            raise ShapeError(
                f"sinogram values {self.values.shape} do not match geometry {expected}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("sinogram contains non-finite values")


def add_noise(sino: Sinogram, target_snr_db: float, seed: int) -> Sinogram:
    """Add i.i.d. zero-mean Gaussian noise at a prescribed signal-to-noise ratio.

    The noise variance is set against the mean-square signal energy,
    ``sigma_n^2 = mean(S^2) / 10^(snr_db / 10)`` (power definition of SNR).
    Deterministic for a given seed.  ``target_snr_db = inf`` disables noise
    and returns the sinogram unchanged.

    Raises
    ------
    DegenerateInputError
        If the sinogram is identically zero (no energy to scale against).
    """
    if np.isinf(target_snr_db):
        return Sinogram(sino.geometry, sino.values.copy(), noise_sigma2=None)
    energy = float(np.mean(sino.values**2))
    if energy == 0.0:
        raise DegenerateInputError("cannot scale noise against an all-zero sinogram")
    sigma2 = energy / (10.0 ** (target_snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, np.sqrt(sigma2), size=sino.values.shape)
    return Sinogram(sino.geometry, sino.values + noise, noise_sigma2=sigma2)


def save_sinogram(path, sino: Sinogram) -> None:
    """Write raw little-endian float64 values behind a small header.

    Header layout: 4-byte magic ``SINO``, uint32 ``n_views``, uint32
    ``n_detectors`` (little-endian), then ``n_views * n_detectors`` float64
    values in view-major order.  Detector spacing is not stored.
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", sino.geometry.n_views, sino.geometry.n_detectors))
        fh.write(sino.values.astype("<f8").tobytes())


def load_sinogram(
    path,
    detector_spacing: float = 1.0,
    padded_size: int | None = None,
) -> Sinogram:
    """Read a sinogram written by :func:`save_sinogram`.

    The header stores only the view/detector counts, so spacing and the padded
    frame must be supplied (``padded_size`` defaults to ``n_detectors``).
    """
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        n_views, n_detectors = struct.unpack("<II", fh.read(8))
        payload = fh.read(n_views * n_detectors * 8)
    if len(payload) != n_views * n_detectors * 8:
        raise FormatError(f"{path}: truncated payload")
    values = np.frombuffer(payload, dtype="<f8").reshape(n_views, n_detectors)
    geom = ProjectionGeometry(
        n_views=n_views,
        n_detectors=n_detectors,
        detector_spacing=detector_spacing,
        padded_size=padded_size if padded_size is not None else n_detectors,
    )
    return Sinogram(geom, values.copy())
