"""Coverage-based calibration diagnostics for sampled reconstructions.

Per pixel, the sampled values form an empirical distribution; a target
coverage ``p`` maps to the central quantile interval
``[Q(0.5 - p/2), Q(0.5 + p/2)]`` (linear interpolation between order
statistics).  Achieved coverage is the fraction of pixels whose ground truth
falls inside the interval, optionally widened by a small ``delta`` offset on
both ends; the expected calibration error averages ``|AC(p) - p|`` over an
even grid of targets.  Because a sigmoid-output model never produces exactly
0 or 1, a tuned ``delta`` is what lets exactly-zero background pixels count
as covered, and it is chosen to minimize the calibration error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .uq.samples import PosteriorSamples

__all__ = [
    "PixelDistributions",
    "CalibrationReport",
    "default_coverage_grid",
    "default_delta_candidates",
    "achieved_coverage",
    "ece",
    "optimize_delta",
    "coverage_quantile_image",
    "NOT_COVERED",
]

NOT_COVERED = np.nan  # sentinel in coverage-quantile maps


def default_coverage_grid(points: int = 99) -> np.ndarray:
    """Evenly spaced target coverages 0.01 .. 0.99 (for the default 99 points)."""
    return np.arange(1, points + 1) / (points + 1)


def default_delta_candidates(count: int = 30) -> np.ndarray:
    """Log-spaced interval-widening offsets between 1e-8 and 1e-1."""
    return np.logspace(-8, -1, count)


class PixelDistributions:
    """Per-pixel empirical distributions: samples sorted ascending along axis 0."""

    def __init__(self, sorted_values: np.ndarray):
        sorted_values = np.asarray(sorted_values, dtype=np.float64)
        if sorted_values.ndim != 3:
            raise ShapeError(
                f"expected (n, height, width) sample stack, got {sorted_values.shape}"
            )
        if not np.all(np.isfinite(sorted_values)):
            raise ValueError("sample stack contains non-finite values")
        self.sorted_values = sorted_values

    @classmethod
    def from_samples(cls, samples: PosteriorSamples) -> "PixelDistributions":
        return cls(np.sort(samples.values, axis=0))

    @property
    def n(self) -> int:
        return self.sorted_values.shape[0]

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.sorted_values.shape[1:]

    def quantiles(self, qs: np.ndarray) -> np.ndarray:
        """Linearly interpolated quantiles, shape ``(len(qs), height, width)``."""
        qs = np.atleast_1d(np.asarray(qs, dtype=np.float64))
        pos = np.clip(qs, 0.0, 1.0) * (self.n - 1)
        lo = np.floor(pos).astype(int)
        hi = np.minimum(lo + 1, self.n - 1)
        frac = (pos - lo)[:, None, None]
        return (1.0 - frac) * self.sorted_values[lo] + frac * self.sorted_values[hi]


@dataclass
class CalibrationReport:
    """Result of the delta-offset optimization."""

    delta: float
    ece: float
    reliability: list[tuple[float, float]]  # (target coverage, achieved coverage)
    coverage_quantiles: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)


def _interval_bounds(dists: PixelDistributions, grid: np.ndarray):
    lo = dists.quantiles(0.5 - grid / 2.0)
    hi = dists.quantiles(0.5 + grid / 2.0)
    return lo, hi


def achieved_coverage(
    dists: PixelDistributions,
    f_star: np.ndarray,
    p: float,
    delta: float = 0.0,
) -> float:
    """Fraction of pixels whose reference value lies in the delta-widened interval."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"target coverage must lie in [0, 1], got {p}")
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    f_star = np.asarray(f_star, dtype=np.float64)
    if f_star.shape != dists.image_shape:
        raise ShapeError(f"reference {f_star.shape} does not match samples {dists.image_shape}")
    lo = dists.quantiles(np.array([0.5 - p / 2.0]))[0]
    hi = dists.quantiles(np.array([0.5 + p / 2.0]))[0]
    covered = (lo - delta <= f_star) & (f_star <= hi + delta)
    return float(covered.mean())


def ece(
    dists: PixelDistributions,
    f_star: np.ndarray,
    delta: float = 0.0,
    grid: np.ndarray | None = None,
) -> float:
    """Mean absolute gap between achieved and target coverage over the grid."""
    if grid is None:
        grid = default_coverage_grid()
    f_star = np.asarray(f_star, dtype=np.float64)
    lo, hi = _interval_bounds(dists, grid)
    covered = (lo - delta <= f_star) & (f_star <= hi + delta)
    ac = covered.mean(axis=(1, 2))
    return float(np.mean(np.abs(ac - grid)))


def optimize_delta(
    dists: PixelDistributions,
    f_star: np.ndarray,
    grid: np.ndarray | None = None,
    delta_candidates: np.ndarray | None = None,
) -> CalibrationReport:
    """Pick the interval-widening offset minimizing the calibration error.

    Evaluates the calibration error for every candidate and returns the full
    report at the argmin; ties break toward the smaller offset.
    """
    if grid is None:
        grid = default_coverage_grid()
    if delta_candidates is None:
        delta_candidates = default_delta_candidates()
    delta_candidates = np.sort(np.asarray(delta_candidates, dtype=np.float64))
    if delta_candidates.size == 0:
        raise ValueError("need at least one delta candidate")
    f_star = np.asarray(f_star, dtype=np.float64)

    lo, hi = _interval_bounds(dists, grid)
    best = None
    best_ac = None
    for delta in delta_candidates:
        covered = (lo - delta <= f_star) & (f_star <= hi + delta)
        ac = covered.mean(axis=(1, 2))
        score = float(np.mean(np.abs(ac - grid)))
        if best is None or score < best[1]:
            best = (float(delta), score)
            best_ac = ac

    delta, score = best
    quantile_map = coverage_quantile_image(dists, f_star, delta, grid)
    return CalibrationReport(
        delta=delta,
        ece=score,
        reliability=list(zip(grid.tolist(), best_ac.tolist())),
        coverage_quantiles=quantile_map,
        grid=grid,
    )


def coverage_quantile_image(
    dists: PixelDistributions,
    f_star: np.ndarray,
    delta: float = 0.0,
    grid: np.ndarray | None = None,
) -> np.ndarray:
    """Per pixel, the smallest grid coverage whose widened interval contains the truth.

    Pixels never covered (truth outside even the widest interval) hold the
    ``NOT_COVERED`` sentinel (NaN).
    """
    if grid is None:
        grid = default_coverage_grid()
    f_star = np.asarray(f_star, dtype=np.float64)
    lo, hi = _interval_bounds(dists, grid)
    covered = (lo - delta <= f_star) & (f_star <= hi + delta)
    # Coverage is monotone in p (intervals nest), so the first covering index
    # along the grid axis is well-defined.
    any_covered = covered.any(axis=0)
    first = covered.argmax(axis=0)
    quantile_map = np.where(any_covered, grid[first], NOT_COVERED)
    return quantile_map
