"""Coordinate-network engine: embeddings, MLP, gradients, optimizers, training."""

from .embedding import Embedding, embed, make_embedding
from .network import (
    DropoutMask,
    InrModel,
    MlpArchitecture,
    forward,
    init_model,
    render_image,
    sample_dropout_mask,
)
from .optim import AdamState, adam_step, adamw_step, init_adam_state
from .loss import TrainConfig, loss_and_grad
from .train import TrainResult, init_model_for_data, train
from .checkpoint import load_model, save_model

__all__ = [
    "Embedding",
    "embed",
    "make_embedding",
    "MlpArchitecture",
    "InrModel",
    "DropoutMask",
    "init_model",
    "forward",
    "render_image",
    "sample_dropout_mask",
    "AdamState",
    "init_adam_state",
    "adam_step",
    "adamw_step",
    "TrainConfig",
    "loss_and_grad",
    "TrainResult",
    "init_model_for_data",
    "train",
    "save_model",
    "load_model",
]
