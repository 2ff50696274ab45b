import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from tomouq import DegenerateInputError, ShapeError
from tomouq.metrics import error_vs_std_distributions, mse, nll, psnr, snr


def test_perfect_reconstruction_sentinels():
    image = np.random.default_rng(0).random((8, 8))
    assert mse(image, image) == 0.0
    assert psnr(image, image) == np.inf
    assert snr(image, image) == np.inf


def test_psnr_direct_formula():
    truth = np.zeros((10, 10))
    truth[0, 0] = 1.0  # peak 1
    rec = truth + 0.1  # mse 0.01
    assert psnr(truth, rec) == pytest.approx(20.0)


def test_snr_log_identity_on_halved_error():
    rng = np.random.default_rng(1)
    truth = rng.random((12, 12))
    err = rng.normal(size=(12, 12))
    full = snr(truth, truth + err)
    halved = snr(truth, truth + err / 2)
    assert halved - full == pytest.approx(20.0 * np.log10(2.0), abs=1e-12)


def test_snr_needs_nonzero_reference():
    with pytest.raises(DegenerateInputError):
        snr(np.zeros((4, 4)), np.ones((4, 4)))


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        mse(np.zeros((4, 4)), np.zeros((4, 5)))


@settings(max_examples=50, deadline=None)
@given(
    hnp.arrays(np.float64, (6, 6), elements=st.floats(0.0, 1.0)),
    hnp.arrays(np.float64, (6, 6), elements=st.floats(0.0, 1.0)),
)
def test_psnr_at_least_snr_on_unit_range_images(truth, rec):
    # peak^2 >= mean power for images in [0,1], so the peak-referenced ratio
    # can only be larger
    if np.all(truth == 0) or np.array_equal(truth, rec):
        return
    assert psnr(truth, rec) >= snr(truth, rec) - 1e-12


# ------------------------------------------------------------------ NLL


def test_nll_zero_at_matched_variance():
    f = np.full((1, 1), 0.3)
    var = np.full((1, 1), 1.0 / (2.0 * np.pi))
    assert nll(f, var, f) == pytest.approx(0.0, abs=1e-15)


def test_nll_unit_variance_constant():
    f = np.full((1, 1), 0.3)
    var = np.ones((1, 1))
    assert nll(f, var, f) == pytest.approx(0.5 * np.log(2.0 * np.pi))


def test_nll_matches_loop_oracle():
    rng = np.random.default_rng(5)
    f_hat = rng.random((8, 8))
    var = rng.random((8, 8)) * 0.1 + 1e-4
    truth = rng.random((8, 8))
    floor = 1e-12
    total = 0.0
    for r in range(8):
        for c in range(8):
            v = max(var[r, c], floor)
            total += (f_hat[r, c] - truth[r, c]) ** 2 / (2 * v) + 0.5 * np.log(2 * np.pi * v)
    assert nll(f_hat, var, truth, floor) == pytest.approx(total, abs=1e-12)
    assert nll(f_hat, var, truth, floor, reduction="mean") == pytest.approx(
        total / 64.0, abs=1e-12
    )


def test_nll_floor_prevents_infinities():
    f = np.zeros((2, 2))
    var = np.zeros((2, 2))
    value = nll(f, var, f + 0.1, var_floor=1e-12)
    assert np.isfinite(value)


def test_nll_minimized_at_squared_error_variance():
    # per-pixel optimum of the Gaussian score is var = err^2
    f_hat = np.full((1, 1), 0.6)
    truth = np.full((1, 1), 0.4)
    opt_var = np.full((1, 1), (0.2) ** 2)
    best = nll(f_hat, opt_var, truth)
    for factor in (0.25, 0.5, 2.0, 4.0):
        assert nll(f_hat, opt_var * factor, truth) > best


# ------------------------------------------------------- error/std pairs


def test_error_std_pairs():
    rng = np.random.default_rng(2)
    f_hat = rng.random((5, 5))
    truth = rng.random((5, 5))
    var = rng.random((5, 5))
    errs, stds = error_vs_std_distributions(f_hat, var, truth)
    assert np.array_equal(errs, np.abs(f_hat - truth).ravel())
    assert np.array_equal(stds, np.sqrt(var).ravel())


def test_error_std_degenerate_cases():
    image = np.random.default_rng(3).random((4, 4))
    errs, stds = error_vs_std_distributions(image, np.full((4, 4), 0.25), image)
    assert np.all(errs == 0.0)
    assert np.all(stds == 0.5)


def test_summary_quantiles_match_sort():
    rng = np.random.default_rng(7)
    f_hat = rng.random((9, 9))
    truth = rng.random((9, 9))
    var = rng.random((9, 9))
    errs, _ = error_vs_std_distributions(f_hat, var, truth)
    sorted_errs = np.sort(errs)
    for q in (0.1, 0.5, 0.9):
        pos = q * (errs.size - 1)
        lo = int(np.floor(pos))
        frac = pos - lo
        manual = sorted_errs[lo] * (1 - frac) + sorted_errs[min(lo + 1, errs.size - 1)] * frac
        assert np.quantile(errs, q) == pytest.approx(manual, abs=1e-12)
