"""Pooled sampling from independently trained base learners.

Each of the ``M`` learners contributes ``N/M`` draws (remainder spread over
the first learners); learners with dropout are sampled stochastically, plain
deterministic learners contribute their single rendering replicated.  Mean
and variance of the pooled stack follow the usual sample formulas, so the
reductions in :mod:`tomouq.uq.samples` apply unchanged.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from ..inr.embedding import Embedding
from ..inr.loss import TrainConfig
from ..inr.network import InrModel, MlpArchitecture, render_image
from ..radon import RadonOperator
from ..sinogram import Sinogram
from .mcd import mcd_sample
from .samples import PosteriorSamples

__all__ = ["ensemble_sample", "train_mcd_ensemble"]


def _member_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def ensemble_sample(
    models: list[InrModel],
    n: int,
    image_shape: tuple[int, int],
    seed: int,
) -> PosteriorSamples:
    """Pool draws from ``M`` trained models into one sample stack of size ``n``.

    With a single model and active dropout this is bit-identical to
    :func:`tomouq.uq.mcd.mcd_sample` under the same seed.
    """
    if not models:
        raise ValueError("ensemble needs at least one model")
    m = len(models)
    if n < m:
        raise ValueError(f"cannot spread {n} draws over {m} learners")
    counts = [n // m] * m
    for i in range(n % m):
        counts[i] += 1

    if m == 1 and models[0].arch.dropout_p > 0:
        samples = mcd_sample(models[0], n, image_shape, seed)
        return replace(samples, method_tag="ensemble")

    parts = []
    seeds = []
    for i, (model, count) in enumerate(zip(models, counts)):
        member_seed = _member_seed(seed, i)
        seeds.append(member_seed)
        if model.arch.dropout_p > 0:
            parts.append(mcd_sample(model, count, image_shape, member_seed).values)
        else:
            image = render_image(model, image_shape)
            parts.append(np.repeat(image[None, :, :], count, axis=0))
    return PosteriorSamples(
        np.concatenate(parts, axis=0), method_tag="ensemble", seeds=tuple(seeds)
    )


def _train_member(args):
    op, sino, arch, emb_args, cfg, compute_dtype = args
    from ..inr.embedding import make_embedding
    from ..inr.train import train

    emb = make_embedding(**emb_args)
    return train(op, sino, arch, emb, cfg, compute_dtype=compute_dtype).model


def train_mcd_ensemble(
    op: RadonOperator,
    sino: Sinogram,
    arch: MlpArchitecture,
    emb: Embedding,
    cfg: TrainConfig,
    m: int,
    n_workers: int = 1,
) -> list[InrModel]:
    """Train ``m`` base learners differing only in their seeds.

    Members are independent (embedding and weight initialization both depend
    on the member seed) and may train in separate processes.
    """
    if m < 1:
        raise ValueError(f"ensemble size must be >= 1, got {m}")
    jobs = []
    for i in range(m):
        member_seed = _member_seed(cfg.seed, i)
        member_cfg = replace(cfg, seed=member_seed)
        emb_args = {
            "kind": emb.kind,
            "m": emb.m,
            "omega0": emb.omega0,
            "seed": _member_seed(member_seed, 1),
        }
        jobs.append((op, sino, arch, emb_args, member_cfg))

    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(_train_member, jobs))
    return [_train_member(job) for job in jobs]
