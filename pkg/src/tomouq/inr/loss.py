"""Training objective: measurement misfit + weight prior + roughness penalty.

For a rendered image ``f`` and flat parameters ``theta`` the (tempered) loss is

    L = 1/(2 sigma^2 T) ||S - A f||^2 + 1/(2 tau^2 T) ||theta||^2 + lambda/T * TV(f)

with temperature ``T`` dividing every term, so gradients at temperature T are
exactly the T=1 gradients divided by T.  The parameter gradient is obtained by
pushing the image-space gradient (adjoint-projected residual plus the TV
gradient) back through the rendering network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError
from ..geometry import normalized_pixel_centers
from ..radon import RadonOperator
from ..sinogram import Sinogram
from ..tv import TV_VARIANTS, tv_gradient, tv_penalty
from .embedding import embed
from .network import DropoutMask, InrModel, backward_features, forward_features

__all__ = ["TrainConfig", "loss_and_grad"]

_TV_SMOOTH_EPS = 1e-8


@dataclass
class TrainConfig:
    """Optimization and objective knobs for fitting a coordinate network."""

    optimizer: str = "adam"
    lr: float = 3e-4
    weight_decay: float = 0.0
    epochs: int = 1
    tv_lambda: float = 0.0
    tv_variant: str = "anisotropic"
    noise_sigma2: float = 1.0
    prior_tau2: float = float("inf")
    temperature: float = 1.0
    seed: int = 0
    dropout_active_in_training: bool = True

    def __post_init__(self):
        if self.optimizer not in ("adam", "adamw"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not (self.lr > 0):
            raise ValueError(f"lr must be positive, got {self.lr}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.tv_lambda < 0:
            raise ValueError(f"tv_lambda must be >= 0, got {self.tv_lambda}")
        if self.tv_variant not in TV_VARIANTS:
            raise ValueError(f"unknown tv_variant {self.tv_variant!r}")
        if not (self.noise_sigma2 > 0):
            raise ValueError("noise_sigma2 must be positive")
        if not (self.prior_tau2 > 0):
            raise ValueError("prior_tau2 must be positive")
        if not (self.temperature > 0):
            raise ValueError("temperature must be positive")


def loss_and_grad(
    model: InrModel,
    op: RadonOperator,
    sino: Sinogram,
    cfg: TrainConfig,
    dropout_mask: DropoutMask | None = None,
    _features: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Loss and its flat parameter gradient for the current model.

    ``_features`` optionally supplies the pre-embedded pixel grid (the
    embedding is frozen, so training loops compute it once).

    Raises
    ------
    NumericError
        If the loss is non-finite.
    """
    height, width = op.image_shape
    if _features is None:
        _features = embed(normalized_pixel_centers((height, width)), model.embedding)

    values, cache = forward_features(model, _features, dropout_mask, keep_cache=True)
    image = values.reshape(height, width)

    residual = op.apply(image) - sino.values
    inv_t = 1.0 / cfg.temperature
    loss = 0.5 / cfg.noise_sigma2 * inv_t * float(np.sum(residual**2))
    d_image = (inv_t / cfg.noise_sigma2) * op.apply_adjoint(residual)

    if cfg.tv_lambda > 0:
        loss += cfg.tv_lambda * inv_t * tv_penalty(image, cfg.tv_variant, _TV_SMOOTH_EPS)
        d_image += cfg.tv_lambda * inv_t * tv_gradient(image, cfg.tv_variant, _TV_SMOOTH_EPS)

    grad = backward_features(model, cache, d_image.ravel(), dropout_mask)

    if np.isfinite(cfg.prior_tau2):
        loss += 0.5 / cfg.prior_tau2 * inv_t * float(model.theta @ model.theta)
        grad += (inv_t / cfg.prior_tau2) * model.theta

    if not np.isfinite(loss):
        raise NumericError("training loss is non-finite")
    return loss, grad
