"""Posterior-style sampling by applying dropout at inference time."""

from __future__ import annotations

import warnings

import numpy as np

from ..inr.network import InrModel, render_image, sample_dropout_mask
from .samples import PosteriorSamples

__all__ = ["DegenerateSamplingWarning", "mcd_sample"]

DEFAULT_N_SAMPLES = 50


class DegenerateSamplingWarning(UserWarning):
    """Sampling a model whose dropout probability is zero: all draws coincide."""


def mcd_sample(
    model: InrModel,
    n: int,
    image_shape: tuple[int, int],
    seed: int,
) -> PosteriorSamples:
    """Render ``n`` images, each under an independent dropout mask.

    Deterministic for a given seed.  With ``dropout_p == 0`` the draws are
    identical (zero predictive variance); a :class:`DegenerateSamplingWarning`
    is emitted and the replicated rendering returned.
    """
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    rng = np.random.default_rng(seed)
    if model.arch.dropout_p == 0:
        warnings.warn(
            "dropout probability is 0; all inference-time samples are identical",
            DegenerateSamplingWarning,
            stacklevel=2,
        )
        image = render_image(model, image_shape)
        stack = np.repeat(image[None, :, :], n, axis=0)
        return PosteriorSamples(stack, method_tag="mcd", seeds=(seed,))

    stack = np.empty((n, *image_shape))
    embed_dim = model.embedding.output_dim
    for i in range(n):
        mask = sample_dropout_mask(model.arch, embed_dim, rng)
        stack[i] = render_image(model, image_shape, mask)
    return PosteriorSamples(stack, method_tag="mcd", seeds=(seed,))
