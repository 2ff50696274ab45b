"""Ellipse-superposition head phantoms.

A phantom is a list of ellipses on the square ``[-1, 1]^2``; a pixel's value
is the clamped sum of the intensity deltas of every ellipse containing its
center.  The standard 10-ellipse head phantom (modified high-contrast
intensities) is provided, plus seeded random variants with jittered ellipse
parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GeometryError

__all__ = [
    "Ellipse",
    "PhantomSpec",
    "SHEPP_LOGAN_ELLIPSES",
    "shepp_logan_spec",
    "generate_shepp_logan",
]


@dataclass(frozen=True)
class Ellipse:
    """One additive ellipse: center, semi-axes, rotation, intensity delta."""

    cx: float
    cy: float
    a: float
    b: float
    rot_deg: float
    delta: float


# Modified (high-contrast) head phantom: large skull ellipse of intensity 1,
# brain at 0.2, small features at 0.0 / 0.3.  Coordinates on [-1, 1]^2, y up.
SHEPP_LOGAN_ELLIPSES: tuple[Ellipse, ...] = (
    Ellipse(0.0, 0.0, 0.69, 0.92, 0.0, 1.0),
    Ellipse(0.0, -0.0184, 0.6624, 0.8740, 0.0, -0.8),
    Ellipse(0.22, 0.0, 0.11, 0.31, -18.0, -0.2),
    Ellipse(-0.22, 0.0, 0.16, 0.41, 18.0, -0.2),
    Ellipse(0.0, 0.35, 0.21, 0.25, 0.0, 0.1),
    Ellipse(0.0, 0.1, 0.046, 0.046, 0.0, 0.1),
    Ellipse(0.0, -0.1, 0.046, 0.046, 0.0, 0.1),
    Ellipse(-0.08, -0.605, 0.046, 0.023, 0.0, 0.1),
    Ellipse(0.0, -0.606, 0.023, 0.023, 0.0, 0.1),
    Ellipse(0.06, -0.605, 0.023, 0.046, 0.0, 0.1),
)


@dataclass(frozen=True)
class PhantomSpec:
    """Recipe for a rendered phantom image.

    ``variant_seed`` of ``None`` renders the ellipses exactly as given;
    an integer seed jitters every ellipse by up to +/-10% (semi-axes and
    intensity multiplicatively, centers by a tenth of the semi-axes,
    rotation by up to +/-1.8 degrees) before rendering, which is how the
    randomized phantom variants are produced.
    """

    size: int
    ellipses: tuple[Ellipse, ...] = field(default_factory=tuple)
    variant_seed: int | None = None


def shepp_logan_spec(size: int, variant_seed: int | None = None) -> PhantomSpec:
    """Spec for the standard 10-ellipse head phantom at the given side length."""
    return PhantomSpec(size=size, ellipses=SHEPP_LOGAN_ELLIPSES, variant_seed=variant_seed)


def _jitter(ellipses: tuple[Ellipse, ...], seed: int) -> tuple[Ellipse, ...]:
    rng = np.random.default_rng(seed)
    out = []
    for e in ellipses:
        u = rng.uniform(-0.1, 0.1, size=6)
        out.append(
            replace(
                e,
                cx=e.cx + u[0] * e.a,
                cy=e.cy + u[1] * e.b,
                a=e.a * (1.0 + u[2]),
                b=e.b * (1.0 + u[3]),
                rot_deg=e.rot_deg + u[4] * 18.0,
                delta=e.delta * (1.0 + u[5]),
            )
        )
    return tuple(out)


def generate_shepp_logan(spec: PhantomSpec) -> np.ndarray:
    """Render a phantom spec to a ``(size, size)`` image in ``[0, 1]``.

    A pixel's value is the sum of the intensity deltas of all ellipses whose
    interior (boundary included) contains the pixel center, clamped to
    ``[0, 1]``.  Deterministic for a given ``(spec, variant_seed)``.

    Raises
    ------
    GeometryError
        If ``spec.size`` is below 16.
    """
    if spec.size < 16:
        raise GeometryError(f"phantom size must be >= 16, got {spec.size}")

    ellipses = spec.ellipses
    if spec.variant_seed is not None:
        ellipses = _jitter(ellipses, spec.variant_seed)

    n = spec.size
    # Pixel centers on [-1, 1]^2, y up (row 0 on top).
    xs = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    ys = 1.0 - (np.arange(n) + 0.5) / n * 2.0
    X, Y = np.meshgrid(xs, ys)

    image = np.zeros((n, n), dtype=np.float64)
    for e in ellipses:
        phi = np.deg2rad(e.rot_deg)
        dx = X - e.cx
        dy = Y - e.cy
        u = dx * np.cos(phi) + dy * np.sin(phi)
        v = -dx * np.sin(phi) + dy * np.cos(phi)
        inside = (u / e.a) ** 2 + (v / e.b) ** 2 <= 1.0
        image[inside] += e.delta
    return np.clip(image, 0.0, 1.0)
