"""Log-density adapters exposing the two posteriors to the MCMC sampler.

Both return callables of a flat vector producing ``(log p, grad log p)``;
tempering is handled inside the sampler, so these are the T=1 densities.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from ..gop import GopConfig, gop_log_posterior
from ..inr.embedding import embed
from ..inr.loss import TrainConfig, loss_and_grad
from ..inr.network import InrModel
from ..geometry import normalized_pixel_centers
from ..radon import RadonOperator
from ..sinogram import Sinogram

__all__ = ["gop_target", "inr_target", "prior_tau2_from_width"]


def gop_target(op: RadonOperator, sino: Sinogram, cfg: GopConfig):
    """Pixel-space posterior: the state vector is the flattened image."""
    shape = op.image_shape

    def target(x: np.ndarray):
        logp, grad = gop_log_posterior(x.reshape(shape), op, sino, cfg)
        return logp, grad.ravel()

    return target


def inr_target(template: InrModel, op: RadonOperator, sino: Sinogram, cfg: TrainConfig):
    """Weight-space posterior of a coordinate network (evaluated without dropout).

    The log density is the negated (untempered) training loss, so it includes
    the measurement likelihood, the Gaussian weight prior ``tau^2``, and the
    roughness penalty.
    """
    base_cfg = replace(cfg, temperature=1.0, dropout_active_in_training=False)
    features = embed(normalized_pixel_centers(op.image_shape), template.embedding)

    def target(theta: np.ndarray):
        model = InrModel(template.embedding, template.arch, theta)
        loss, grad = loss_and_grad(model, op, sino, base_cfg, _features=features)
        return -loss, -grad

    return target


def prior_tau2_from_width(gamma: float, width: int) -> float:
    """Width-scaled weight-prior variance heuristic, ``1 / sqrt(gamma * width)``."""
    return 1.0 / np.sqrt(gamma * width)
