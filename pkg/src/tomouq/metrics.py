"""Reconstruction accuracy and probabilistic quality metrics.

All metrics are pure functions over immutable arrays.  ``f_star`` always
denotes the reference (ground-truth) image.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, ShapeError

__all__ = ["mse", "psnr", "snr", "nll", "error_vs_std_distributions"]


def _check_dims(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise ShapeError(f"image shapes differ: {sorted(shapes)}")


def mse(f_star: np.ndarray, f: np.ndarray) -> float:
    """Mean squared error over pixels."""
    f_star = np.asarray(f_star, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    _check_dims(f_star, f)
    return float(np.mean((f_star - f) ** 2))


def psnr(f_star: np.ndarray, f: np.ndarray) -> float:
    """Peak signal-to-noise ratio ``10 log10(max(f*)^2 / MSE)`` in dB.

    Identical images give ``+inf`` (a sentinel, not an error).
    """
    err = mse(f_star, f)
    if err == 0.0:
        return float("inf")
    peak = float(np.max(f_star))
    return 10.0 * np.log10(peak * peak / err)


def snr(f_star: np.ndarray, f: np.ndarray) -> float:
    """Signal-to-noise ratio ``20 log10(||f*|| / ||f* - f||)`` in dB."""
    f_star = np.asarray(f_star, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    _check_dims(f_star, f)
    signal = float(np.linalg.norm(f_star))
    if signal == 0.0:
        raise DegenerateInputError("SNR needs a nonzero reference image")
    noise = float(np.linalg.norm(f_star - f))
    if noise == 0.0:
        return float("inf")
    return 20.0 * np.log10(signal / noise)


def nll(
    f_hat: np.ndarray,
    var_hat: np.ndarray,
    f_star: np.ndarray,
    var_floor: float = 1e-12,
    reduction: str = "sum",
) -> float:
    """Gaussian negative log-likelihood of the reference under (mean, variance) maps.

    Per pixel: ``(f_hat - f*)^2 / (2 var) + 0.5 log(2 pi var)`` with the
    variance clamped below by ``var_floor`` so degenerate zero-variance pixels
    cannot produce infinities.  ``reduction`` is ``"sum"`` (the conventional
    image total) or ``"mean"`` (per-pixel average, comparable across sizes).
    """
    f_hat = np.asarray(f_hat, dtype=np.float64)
    var_hat = np.asarray(var_hat, dtype=np.float64)
    f_star = np.asarray(f_star, dtype=np.float64)
    _check_dims(f_hat, var_hat, f_star)
    if reduction not in ("sum", "mean"):
        raise ValueError(f"unknown reduction {reduction!r}")
    var = np.maximum(var_hat, var_floor)
    terms = (f_hat - f_star) ** 2 / (2.0 * var) + 0.5 * np.log(2.0 * np.pi * var)
    return float(terms.sum() if reduction == "sum" else terms.mean())


def error_vs_std_distributions(
    f_hat: np.ndarray,
    var_hat: np.ndarray,
    f_star: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Paired flattened |error| and predicted-std values for distribution plots."""
    f_hat = np.asarray(f_hat, dtype=np.float64)
    var_hat = np.asarray(var_hat, dtype=np.float64)
    f_star = np.asarray(f_star, dtype=np.float64)
    _check_dims(f_hat, var_hat, f_star)
    return np.abs(f_hat - f_star).ravel(), np.sqrt(var_hat).ravel()
