"""Direct pixel-grid inference under the Gaussian measurement model.

The image itself is the parameter vector: the unnormalized log posterior is

    log p(f | S) = -1/(2 sigma^2) ||S - A f||^2 - lambda * T(f)   (+ const)

with T one of the total-variation penalties.  ``gop_tv_map`` ascends this
objective with backtracking and a box clamp to [0, 1]; the same log density
(and gradient) also serves as an MCMC target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TrainingDivergedError
from .radon import RadonOperator
from .sinogram import Sinogram
from .tv import tv_gradient, tv_penalty

__all__ = ["GopConfig", "gop_log_posterior", "gop_tv_map"]

_TV_SMOOTH_EPS = 1e-8


@dataclass
class GopConfig:
    """Pixel-grid posterior parameters.

    ``tv_variant`` picks the roughness penalty; gradient evaluations smooth
    the nondifferentiable variants internally.
    """

    tv_lambda: float = 0.1
    tv_variant: str = "isotropic-exact"
    step_size: float = 1e-3
    noise_sigma2: float = 1.0
    max_iters: int = 500

    def __post_init__(self):
        if self.tv_lambda < 0:
            raise ValueError(f"tv_lambda must be >= 0, got {self.tv_lambda}")
        if not (self.step_size > 0):
            raise ValueError(f"step_size must be positive, got {self.step_size}")
        if not (self.noise_sigma2 > 0):
            raise ValueError(f"noise_sigma2 must be positive, got {self.noise_sigma2}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


def gop_log_posterior(
    f: np.ndarray,
    op: RadonOperator,
    sino: Sinogram,
    cfg: GopConfig,
) -> tuple[float, np.ndarray]:
    """Unnormalized log posterior of a pixel image and its gradient.

    Returns
    -------
    (float, ndarray)
        ``log p`` up to an additive constant, and ``d log p / d f`` as an
        image-shaped array: ``(1/sigma^2) A^T (S - A f) - lambda * grad T(f)``.
    """
    f = np.asarray(f, dtype=np.float64)
    residual = sino.values - op.apply(f)
    logp = -0.5 / cfg.noise_sigma2 * float(np.sum(residual**2))
    grad = op.apply_adjoint(residual) / cfg.noise_sigma2
    if cfg.tv_lambda > 0:
        logp -= cfg.tv_lambda * tv_penalty(f, cfg.tv_variant, smooth_eps=_TV_SMOOTH_EPS)
        grad -= cfg.tv_lambda * tv_gradient(f, cfg.tv_variant, smooth_eps=_TV_SMOOTH_EPS)
    return logp, grad


def gop_tv_map(
    op: RadonOperator,
    sino: Sinogram,
    cfg: GopConfig,
    f0: np.ndarray | None = None,
) -> np.ndarray:
    """Maximum-a-posteriori image by projected gradient ascent.

    Runs ``cfg.max_iters`` ascent steps from a zero image (or ``f0``),
    clamping each iterate to ``[0, 1]``.  If a step would decrease the log
    posterior the step size is halved and the step retried (backtracking), so
    the negative-log objective is nonincreasing.

    Raises
    ------
    TrainingDivergedError
        If the objective becomes non-finite; the error carries the last
        finite iterate in ``last_state``.
    """
    f = np.zeros(op.image_shape) if f0 is None else np.clip(np.asarray(f0, float), 0.0, 1.0)
    logp, grad = gop_log_posterior(f, op, sino, cfg)
    step = cfg.step_size
    for _ in range(cfg.max_iters):
        accepted = False
        for _ in range(40):
            candidate = np.clip(f + step * grad, 0.0, 1.0)
            logp_new, grad_new = gop_log_posterior(candidate, op, sino, cfg)
            if not np.isfinite(logp_new):
                raise TrainingDivergedError(
                    "MAP ascent produced a non-finite objective", last_state=f
                )
            if logp_new >= logp:
                f, logp, grad = candidate, logp_new, grad_new
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # step underflow: no ascent direction left at this scale
    return f
