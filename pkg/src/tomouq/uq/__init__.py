"""Posterior sampling over reconstructions and sample reductions."""

from .samples import (
    PosteriorSamples,
    load_samples,
    posterior_mean,
    posterior_variance,
    save_samples,
)
from .mcd import DegenerateSamplingWarning, mcd_sample
from .ensemble import ensemble_sample, train_mcd_ensemble
from .bbb import BbbModel, bbb_draw_thetas, bbb_init, bbb_sample, bbb_train, gaussian_kl
from .hmc import HmcConfig, HmcResult, effective_sample_size, hmc_sample, leapfrog
from .targets import gop_target, inr_target, prior_tau2_from_width

__all__ = [
    "PosteriorSamples",
    "posterior_mean",
    "posterior_variance",
    "save_samples",
    "load_samples",
    "mcd_sample",
    "DegenerateSamplingWarning",
    "ensemble_sample",
    "train_mcd_ensemble",
    "BbbModel",
    "bbb_init",
    "bbb_train",
    "bbb_draw_thetas",
    "bbb_sample",
    "gaussian_kl",
    "HmcConfig",
    "HmcResult",
    "hmc_sample",
    "leapfrog",
    "effective_sample_size",
    "gop_target",
    "inr_target",
    "prior_tau2_from_width",
]
