"""Mean-field Gaussian variational inference over network weights.

The variational family is a diagonal Gaussian ``N(mu, sigma^2)`` with
``sigma = softplus(rho)`` kept positive under unconstrained optimization.
Training ascends the reweighted evidence bound

    E_q[ log p(S | theta) - lambda TV(f_theta) ] - xi * KL[q || N(0, prior_sigma^2)]

with one reparameterized draw ``theta = mu + sigma * eps`` per step; the
Gaussian-Gaussian KL is closed form.  The roughness penalty rides along in
the expectation term because its image-space prior has no tractable KL.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from ..errors import NumericError, TrainingDivergedError
from ..inr.embedding import Embedding, embed
from ..inr.loss import TrainConfig, loss_and_grad
from ..inr.network import InrModel, MlpArchitecture, init_model
from ..inr.optim import adam_step, init_adam_state
from ..geometry import normalized_pixel_centers
from ..radon import RadonOperator
from ..sinogram import Sinogram
from .samples import PosteriorSamples

__all__ = ["BbbModel", "bbb_init", "gaussian_kl", "bbb_train", "bbb_draw_thetas", "bbb_sample"]


@dataclass
class BbbModel:
    """Variational posterior state for one network."""

    embedding: Embedding
    arch: MlpArchitecture
    mu: np.ndarray
    rho: np.ndarray
    prior_sigma: float
    kl_factor: float

    @property
    def sigma(self) -> np.ndarray:
        return _softplus(self.rho)

    def mean_model(self) -> InrModel:
        return InrModel(self.embedding, self.arch, self.mu.copy())


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def bbb_init(
    arch: MlpArchitecture,
    emb: Embedding,
    prior_sigma: float,
    kl_factor: float,
    seed: int = 0,
    rho0: float = -5.0,
    mu0: np.ndarray | None = None,
) -> BbbModel:
    """Start from a standard network init with a small uniform posterior scale.

    ``mu0`` overrides the initial posterior mean (e.g. a data-matched init).
    """
    base_theta = mu0.copy() if mu0 is not None else init_model(arch, emb, seed=seed).theta
    return BbbModel(
        embedding=emb,
        arch=arch,
        mu=base_theta,
        rho=np.full(base_theta.size, rho0),
        prior_sigma=prior_sigma,
        kl_factor=kl_factor,
    )


def gaussian_kl(mu: np.ndarray, sigma: np.ndarray, prior_sigma: float) -> float:
    """KL of elementwise ``N(mu, sigma^2)`` from ``N(0, prior_sigma^2)``, summed."""
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    s2 = prior_sigma * prior_sigma
    return float(
        np.sum(np.log(prior_sigma / sigma) + (sigma**2 + mu**2) / (2.0 * s2) - 0.5)
    )


def bbb_train(
    op: RadonOperator,
    sino: Sinogram,
    arch: MlpArchitecture,
    emb: Embedding,
    cfg: TrainConfig,
    bbb: BbbModel | None = None,
) -> tuple[BbbModel, list[float]]:
    """Optimize the variational parameters; returns the model and loss trace.

    The data term reuses the deterministic training loss with the parameter
    prior disabled (the Gaussian prior lives in the KL term); dropout is never
    active here.
    """
    rng = np.random.default_rng(cfg.seed)
    if bbb is None:
        from ..inr.train import init_model_for_data

        mu0 = init_model_for_data(op, sino, arch, emb, seed=cfg.seed).theta
        bbb = bbb_init(arch, emb, prior_sigma=100.0, kl_factor=1e-5, seed=cfg.seed, mu0=mu0)
    mu = bbb.mu.copy()
    rho = bbb.rho.copy()
    data_cfg = replace(cfg, prior_tau2=float("inf"))
    features = embed(normalized_pixel_centers(op.image_shape), emb)
    state = init_adam_state(2 * mu.size)
    s2 = bbb.prior_sigma**2
    losses: list[float] = []

    for _ in range(cfg.epochs):
        sigma = _softplus(rho)
        eps = rng.standard_normal(mu.size)
        theta = mu + sigma * eps
        model = InrModel(bbb.embedding, arch, theta)
        try:
            data_loss, dtheta = loss_and_grad(model, op, sino, data_cfg, _features=features)
        except NumericError as exc:
            raise TrainingDivergedError(
                f"variational training diverged after {len(losses)} epochs",
                last_state=replace(bbb, mu=mu, rho=rho),
            ) from exc

        kl = gaussian_kl(mu, sigma, bbb.prior_sigma)
        loss = data_loss + bbb.kl_factor * kl
        losses.append(loss)

        sp_grad = expit(rho)  # d softplus / d rho
        dmu = dtheta + bbb.kl_factor * mu / s2
        drho = (dtheta * eps + bbb.kl_factor * (sigma / s2 - 1.0 / sigma)) * sp_grad

        packed, state = adam_step(
            np.concatenate([mu, rho]), np.concatenate([dmu, drho]), state, cfg.lr
        )
        mu, rho = packed[: mu.size], packed[mu.size :]
        if not np.all(np.isfinite(packed)):
            raise TrainingDivergedError(
                f"variational parameters diverged after {len(losses)} epochs",
                last_state=bbb,
            )
        bbb = replace(bbb, mu=mu, rho=rho)

    return bbb, losses


def bbb_draw_thetas(bbb: BbbModel, n: int, seed: int) -> np.ndarray:
    """Reparameterized weight draws ``mu + sigma * eps``, shape ``(n, dim)``."""
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal((n, bbb.mu.size))
    return bbb.mu[None, :] + bbb.sigma[None, :] * eps


def bbb_sample(
    bbb: BbbModel,
    n: int,
    image_shape: tuple[int, int],
    seed: int,
) -> PosteriorSamples:
    """Render ``n`` reparameterized weight draws from the variational posterior."""
    from ..inr.network import render_image

    thetas = bbb_draw_thetas(bbb, n, seed)
    stack = np.empty((n, *image_shape))
    for i in range(n):
        stack[i] = render_image(InrModel(bbb.embedding, bbb.arch, thetas[i]), image_shape)
    return PosteriorSamples(stack, method_tag="bbb", seeds=(seed,))
