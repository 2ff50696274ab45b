import numpy as np
import pytest

from tomouq.calibration import (
    PixelDistributions,
    achieved_coverage,
    coverage_quantile_image,
    default_coverage_grid,
    default_delta_candidates,
    ece,
    optimize_delta,
)
from tomouq.uq import PosteriorSamples


def _self_calibrated(n_samples=1000, shape=(40, 50), seed=0):
    """Ground truth drawn from the same per-pixel Gaussian as the samples."""
    rng = np.random.default_rng(seed)
    mu = rng.random(shape)
    sigma = 0.05 + 0.1 * rng.random(shape)
    stack = mu[None] + sigma[None] * rng.standard_normal((n_samples, *shape))
    truth = mu + sigma * rng.standard_normal(shape)
    return PixelDistributions(np.sort(stack, axis=0)), truth


def test_default_grid_evenly_spaced():
    grid = default_coverage_grid()
    assert grid.size == 99
    assert grid[0] == pytest.approx(0.01)
    assert grid[-1] == pytest.approx(0.99)
    assert np.allclose(np.diff(grid), 0.01)


def test_quantiles_match_numpy_linear():
    rng = np.random.default_rng(1)
    stack = np.sort(rng.random((37, 4, 4)), axis=0)
    dists = PixelDistributions(stack)
    for q in (0.0, 0.13, 0.5, 0.77, 1.0):
        mine = dists.quantiles(np.array([q]))[0]
        ref = np.quantile(stack, q, axis=0, method="linear")
        assert np.allclose(mine, ref, atol=1e-12)


def test_full_range_with_offset_covers_everything():
    dists, truth = _self_calibrated(n_samples=200, shape=(10, 10))
    truth = np.clip(truth, dists.sorted_values.min(), dists.sorted_values.max())
    assert achieved_coverage(dists, truth, p=1.0, delta=0.01) == 1.0


def test_degenerate_samples_equal_truth():
    truth = np.random.default_rng(2).random((6, 6))
    stack = np.repeat(truth[None], 20, axis=0)
    dists = PixelDistributions(stack)
    for p in (0.1, 0.5, 0.9):
        assert achieved_coverage(dists, truth, p, delta=1e-6) == 1.0


def test_coverage_monotone_in_p_and_delta():
    dists, truth = _self_calibrated(n_samples=300, shape=(15, 15), seed=3)
    levels = [achieved_coverage(dists, truth, p) for p in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert all(a <= b + 1e-12 for a, b in zip(levels, levels[1:]))
    deltas = [achieved_coverage(dists, truth, 0.5, d) for d in (0.0, 0.01, 0.1)]
    assert all(a <= b + 1e-12 for a, b in zip(deltas, deltas[1:]))


def test_self_calibrated_coverage_tracks_target():
    dists, truth = _self_calibrated()
    for p in np.arange(0.1, 0.95, 0.1):
        ac = achieved_coverage(dists, truth, float(p))
        assert abs(ac - p) <= 0.02


def test_self_calibrated_ece_small():
    dists, truth = _self_calibrated()
    assert ece(dists, truth) < 0.03


def test_ece_invariant_to_pixel_ordering():
    dists, truth = _self_calibrated(n_samples=200, shape=(8, 8), seed=5)
    perm = np.random.default_rng(0).permutation(64)
    stack = dists.sorted_values.reshape(200, -1)[:, perm].reshape(200, 8, 8)
    shuffled = PixelDistributions(stack)
    truth_shuffled = truth.ravel()[perm].reshape(8, 8)
    assert ece(dists, truth) == pytest.approx(ece(shuffled, truth_shuffled), abs=1e-12)


def test_degenerate_ece_closed_form():
    # all samples equal the truth: AC = 1 at every target, so the error is
    # the mean of (1 - p) over the grid
    truth = np.random.default_rng(4).random((5, 5))
    stack = np.repeat(truth[None], 10, axis=0)
    dists = PixelDistributions(stack)
    grid = default_coverage_grid()
    expected = float(np.mean(1.0 - grid))
    assert ece(dists, truth, delta=1e-9) == pytest.approx(expected, abs=1e-12)


def test_delta_optimization_prefers_smallest_when_unneeded():
    # over-dispersed samples around the exact truth cover generously at every
    # level, so any widening only increases over-coverage
    rng = np.random.default_rng(12)
    shape = (20, 20)
    truth = rng.random(shape)
    stack = np.sort(truth[None] + 0.2 * rng.standard_normal((500, *shape)), axis=0)
    dists = PixelDistributions(stack)
    report = optimize_delta(dists, truth)
    assert report.delta == default_delta_candidates()[0]


def test_delta_strictly_helps_zero_background():
    # strictly positive near-zero samples against exactly-zero truth: without
    # widening nothing is covered, with it everything is
    rng = np.random.default_rng(6)
    shape = (12, 12)
    stack = np.sort(1e-4 + 1e-4 * rng.random((100, *shape)), axis=0)
    dists = PixelDistributions(stack)
    truth = np.zeros(shape)
    report = optimize_delta(dists, truth)
    assert report.delta > 0
    assert report.ece < ece(dists, truth, delta=0.0)


def test_optimize_delta_interior_minimum_on_mixed_pixels():
    # half the truth sits at exact zero below the sample support, half is
    # well-calibrated: tiny deltas fail the zero pixels, huge deltas
    # overcover everything, so an interior candidate wins
    rng = np.random.default_rng(7)
    shape = (20, 20)
    mu = rng.random(shape) * 0.5 + 0.25
    sigma = 0.02
    stack = np.sort(mu[None] + sigma * rng.standard_normal((400, *shape)), axis=0)
    truth = mu + sigma * rng.standard_normal(shape)
    zero_mask = rng.random(shape) < 0.5
    truth[zero_mask] = 0.0
    stack_zero = np.sort(5e-4 + 5e-4 * rng.random((400, np.sum(zero_mask))), axis=0)
    stack[:, zero_mask] = stack_zero
    dists = PixelDistributions(stack)
    candidates = default_delta_candidates()
    report = optimize_delta(dists, truth, delta_candidates=candidates)
    assert candidates[0] < report.delta < candidates[-1]
    scores = [ece(dists, truth, float(d)) for d in candidates]
    assert report.ece == pytest.approx(min(scores), abs=1e-12)


def test_reliability_curve_monotone():
    dists, truth = _self_calibrated(n_samples=300, shape=(10, 10), seed=8)
    report = optimize_delta(dists, truth)
    achieved = [ac for _, ac in report.reliability]
    assert all(a <= b + 1e-12 for a, b in zip(achieved, achieved[1:]))


# --------------------------------------------------- coverage quantiles


def test_quantile_map_zero_when_median_matches():
    truth = np.random.default_rng(9).random((4, 4))
    stack = np.repeat(truth[None], 21, axis=0)
    dists = PixelDistributions(stack)
    qmap = coverage_quantile_image(dists, truth, delta=1e-9)
    # covered already at the tightest grid level
    assert np.all(qmap == default_coverage_grid()[0])


def test_quantile_map_sentinel_outside_support():
    stack = np.sort(np.random.default_rng(10).random((50, 3, 3)), axis=0)
    dists = PixelDistributions(stack)
    truth = np.full((3, 3), 5.0)  # far outside [0, 1] samples
    qmap = coverage_quantile_image(dists, truth, delta=1e-3)
    assert np.all(np.isnan(qmap))


def test_inverse_quantiles_uniform_for_calibrated_data():
    # inverse-transform property: drawing the truth through the empirical
    # quantile function at a uniform level makes calibration exact at finite
    # sample size, so the smallest covering central quantile must be uniform
    # over the grid (sentinel included); chi-square test at the 5% level
    rng = np.random.default_rng(5)
    shape, n = (50, 50), 1000
    mu = rng.random(shape)
    sigma = 0.05 + 0.1 * rng.random(shape)
    stack = np.sort(mu[None] + sigma[None] * rng.standard_normal((n, *shape)), axis=0)
    dists = PixelDistributions(stack)
    levels = rng.uniform(0, 1, shape)
    pos = levels * (n - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, n - 1)
    frac = pos - lo
    flat = stack.reshape(n, -1)
    cols = np.arange(flat.shape[1])
    truth = (
        (1 - frac).ravel() * flat[lo.ravel(), cols] + frac.ravel() * flat[hi.ravel(), cols]
    ).reshape(shape)

    grid = default_coverage_grid()
    qmap = coverage_quantile_image(dists, truth, delta=0.0, grid=grid)
    # bin by grid index (10 indices per bin; the sentinel joins the top bin)
    gidx = np.where(
        np.isnan(qmap),
        grid.size,
        np.searchsorted(grid, np.nan_to_num(qmap, nan=0.0), side="left"),
    ).astype(int)
    counts = np.bincount(gidx.ravel() // 10, minlength=10)
    expected = qmap.size / 10.0
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    # 9 degrees of freedom, 5% critical value
    assert chi2 < 16.92
