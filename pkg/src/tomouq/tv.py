"""Total-variation penalties over forward pixel differences.

Three variants share the same difference stencil (``dx`` along rows toward
larger x, ``dy`` along columns toward larger y, replicate boundary so the
last row/column difference is zero):

* ``isotropic-exact``:   sum of ``sqrt(dx^2 + dy^2)``
* ``isotropic-squared``: sum of ``dx^2 + dy^2``
* ``anisotropic``:       sum of ``|dx| + |dy|``

``smooth_eps`` replaces the nonsmooth square roots / absolute values with
``sqrt(. + eps^2)`` so gradient-based solvers see a differentiable penalty;
the default of 0 is the exact definition.
"""

from __future__ import annotations

import numpy as np

__all__ = ["TV_VARIANTS", "tv_penalty", "tv_gradient"]

TV_VARIANTS = ("isotropic-exact", "isotropic-squared", "anisotropic")


def _diffs(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dx = np.zeros_like(image)
    dy = np.zeros_like(image)
    dx[:, :-1] = image[:, 1:] - image[:, :-1]
    dy[:-1, :] = image[1:, :] - image[:-1, :]
    return dx, dy


def _check_variant(variant: str) -> None:
    if variant not in TV_VARIANTS:
        raise ValueError(f"unknown TV variant {variant!r}, expected one of {TV_VARIANTS}")


def tv_penalty(image: np.ndarray, variant: str, smooth_eps: float = 0.0) -> float:
    """Nonnegative roughness penalty of an image under the chosen variant."""
    _check_variant(variant)
    image = np.asarray(image, dtype=np.float64)
    dx, dy = _diffs(image)
    e2 = smooth_eps * smooth_eps
    if variant == "isotropic-exact":
        return float(np.sum(np.sqrt(dx * dx + dy * dy + e2)))
    if variant == "isotropic-squared":
        return float(np.sum(dx * dx + dy * dy))
    return float(np.sum(np.sqrt(dx * dx + e2) + np.sqrt(dy * dy + e2)))


def tv_gradient(image: np.ndarray, variant: str, smooth_eps: float = 1e-8) -> np.ndarray:
    """Gradient of :func:`tv_penalty` with respect to every pixel.

    The exact isotropic and anisotropic variants are smoothed with
    ``smooth_eps`` (they are nondifferentiable at zero difference); the
    squared variant is smooth and ignores it.
    """
    _check_variant(variant)
    image = np.asarray(image, dtype=np.float64)
    dx, dy = _diffs(image)
    e2 = smooth_eps * smooth_eps

    if variant == "isotropic-exact":
        mag = np.sqrt(dx * dx + dy * dy + e2)
        gx = dx / mag
        gy = dy / mag
    elif variant == "isotropic-squared":
        gx = 2.0 * dx
        gy = 2.0 * dy
    else:
        gx = dx / np.sqrt(dx * dx + e2)
        gy = dy / np.sqrt(dy * dy + e2)

    # dx[r, c] = f[r, c+1] - f[r, c]; accumulate d(penalty)/d(dx) into both pixels.
    grad = np.zeros_like(image)
    grad[:, 1:] += gx[:, :-1]
    grad[:, :-1] -= gx[:, :-1]
    grad[1:, :] += gy[:-1, :]
    grad[:-1, :] -= gy[:-1, :]
    return grad
