"""Coordinate MLP with a fixed computation graph and hand-rolled gradients.

The network maps an embedded coordinate to a single sigmoid output in (0, 1):

    features -> [drop] W_1 act -> [drop] W_2 act -> ... W_depth act -> W_out sigmoid

Inverted dropout is applied to the input of every hidden weight layer (the
embedding features included) but not to the input of the output layer;
surviving units are scaled by ``1/(1-p)`` so the expected preactivation
matches the mask-free network.  All parameters live in one flat float64
vector, which keeps optimizers, samplers, and checkpoints trivial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import NumericError, ShapeError
from ..geometry import normalized_pixel_centers
from .embedding import Embedding, embed

__all__ = [
    "ACTIVATIONS",
    "MlpArchitecture",
    "InrModel",
    "DropoutMask",
    "param_count",
    "init_model",
    "sample_dropout_mask",
    "forward",
    "render_image",
]

ACTIVATIONS = ("relu", "silu", "sine", "softplus", "tanh")


@dataclass(frozen=True)
class MlpArchitecture:
    """Shape and nonlinearity of the network; the output unit is always sigmoid."""

    depth: int
    width: int
    activation: str = "silu"
    sine_omega: float = 30.0
    dropout_p: float = 0.0

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}, expected one of {ACTIVATIONS}"
            )
        if not (0.0 <= self.dropout_p < 1.0):
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")


@dataclass
class InrModel:
    """A frozen embedding plus the flat parameter vector of the MLP.

    Parameters are float64 by default; a float32 vector is preserved as-is
    (training may evaluate in single precision for speed while keeping
    double-precision master weights).
    """

    embedding: Embedding
    arch: MlpArchitecture
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta)
        if theta.dtype != np.float32:
            theta = theta.astype(np.float64)
        self.theta = theta
        expected = param_count(self.arch, self.embedding.output_dim)
        if self.theta.shape != (expected,):
            raise ShapeError(
                f"theta has {self.theta.size} entries, architecture needs {expected}"
            )


@dataclass
class DropoutMask:
    """Per-unit keep masks (one array per hidden weight layer input)."""

    masks: list[np.ndarray]
    p: float


def _layer_dims(arch: MlpArchitecture, in_dim: int) -> list[tuple[int, int]]:
    dims = [(in_dim, arch.width)]
    dims += [(arch.width, arch.width)] * (arch.depth - 1)
    dims.append((arch.width, 1))
    return dims


def param_count(arch: MlpArchitecture, in_dim: int) -> int:
    return sum(fi * fo + fo for fi, fo in _layer_dims(arch, in_dim))


def _unpack(theta: np.ndarray, arch: MlpArchitecture, in_dim: int):
    """Views into the flat vector as (W, b) pairs; no copies."""
    params = []
    offset = 0
    for fi, fo in _layer_dims(arch, in_dim):
        w = theta[offset : offset + fi * fo].reshape(fi, fo)
        offset += fi * fo
        b = theta[offset : offset + fo]
        offset += fo
        params.append((w, b))
    return params


def _check_finite(params, arch: MlpArchitecture) -> None:
    for i, (w, b) in enumerate(params):
        name = "output layer" if i == len(params) - 1 else f"hidden layer {i + 1}"
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(b)):
            raise NumericError(f"non-finite parameter in {name}")


def init_model(arch: MlpArchitecture, emb: Embedding, seed: int = 0) -> InrModel:
    """Random model with layer-appropriate uniform fan-in scaling.

    Hidden layers use Kaiming-uniform bounds for relu/silu/softplus,
    Xavier-uniform for tanh, and the omega-scaled uniform rule for sine;
    the sigmoid output layer is Xavier-uniform.  Biases start at zero.
    """
    rng = np.random.default_rng(seed)
    in_dim = emb.output_dim
    chunks = []
    dims = _layer_dims(arch, in_dim)
    for i, (fi, fo) in enumerate(dims):
        is_output = i == len(dims) - 1
        if is_output or arch.activation == "tanh":
            bound = np.sqrt(6.0 / (fi + fo))
        elif arch.activation == "sine":
            bound = np.sqrt(6.0 / fi) / arch.sine_omega
        else:
            bound = np.sqrt(6.0 / fi)
        chunks.append(rng.uniform(-bound, bound, size=fi * fo))
        chunks.append(np.zeros(fo))
    return InrModel(embedding=emb, arch=arch, theta=np.concatenate(chunks))


def sample_dropout_mask(arch: MlpArchitecture, embed_dim: int, rng: np.random.Generator) -> DropoutMask:
    """Fresh 0/1 keep masks for every hidden weight layer input."""
    sizes = [embed_dim] + [arch.width] * (arch.depth - 1)
    masks = [
        (rng.random(size) >= arch.dropout_p).astype(np.float64) for size in sizes
    ]
    return DropoutMask(masks=masks, p=arch.dropout_p)


def _validate_mask(mask: DropoutMask, arch: MlpArchitecture, embed_dim: int) -> None:
    sizes = [embed_dim] + [arch.width] * (arch.depth - 1)
    if len(mask.masks) != len(sizes):
        raise ShapeError(f"dropout mask has {len(mask.masks)} layers, expected {len(sizes)}")
    for m, size in zip(mask.masks, sizes):
        if m.shape != (size,):
            raise ShapeError(f"dropout mask shape {m.shape} does not match layer width {size}")


def _activation(z: np.ndarray, arch: MlpArchitecture) -> tuple[np.ndarray, np.ndarray | None]:
    """Activation value plus whatever intermediate the gradient can reuse."""
    kind = arch.activation
    if kind == "relu":
        return np.maximum(z, 0.0), None
    if kind == "silu":
        s = expit(z)
        return z * s, s
    if kind == "sine":
        return np.sin(arch.sine_omega * z), None
    if kind == "softplus":
        return np.logaddexp(0.0, z), None
    t = np.tanh(z)
    return t, t


def _chain_activation_grad(dx: np.ndarray, z: np.ndarray, saved, arch: MlpArchitecture) -> np.ndarray:
    """``dx * act'(z)`` with per-kind fused forms (dx is consumed)."""
    kind = arch.activation
    if kind == "relu":
        return np.where(z > 0.0, dx, 0.0)
    if kind == "silu":
        s = saved
        dx *= s * (1.0 + z * (1.0 - s))
        return dx
    if kind == "sine":
        dx *= np.cos(arch.sine_omega * z)
        dx *= arch.sine_omega
        return dx
    if kind == "softplus":
        dx *= expit(z)
        return dx
    dx *= 1.0 - saved * saved
    return dx


def forward_features(
    model: InrModel,
    features: np.ndarray,
    dropout_mask: DropoutMask | None = None,
    keep_cache: bool = False,
):
    """Run the MLP on pre-embedded features.

    Returns ``(values, cache)``; ``cache`` holds the per-layer inputs and
    preactivations needed by :func:`backward_features` (``None`` unless
    requested).
    """
    arch = model.arch
    in_dim = model.embedding.output_dim
    params = _unpack(model.theta, arch, in_dim)
    _check_finite(params, arch)
    if dropout_mask is not None:
        _validate_mask(dropout_mask, arch, in_dim)

    x = np.asarray(features, dtype=model.theta.dtype)
    layer_inputs = []
    preacts = []
    saved = []
    for i in range(arch.depth):
        if dropout_mask is not None:
            scale = (dropout_mask.masks[i] / (1.0 - dropout_mask.p)).astype(x.dtype)
            x = x * scale
        w, b = params[i]
        z = x @ w + b
        layer_inputs.append(x)
        preacts.append(z)
        x, extra = _activation(z, arch)
        saved.append(extra)
    w_out, b_out = params[-1]
    z_out = (x @ w_out + b_out).ravel()
    y = expit(z_out)
    cache = None
    if keep_cache:
        cache = {"layer_inputs": layer_inputs, "preacts": preacts, "saved": saved,
                 "last_hidden": x, "output": y}
    return y, cache


def backward_features(
    model: InrModel,
    cache: dict,
    dvalues: np.ndarray,
    dropout_mask: DropoutMask | None = None,
) -> np.ndarray:
    """Backpropagate d(loss)/d(output values) into a flat parameter gradient."""
    arch = model.arch
    in_dim = model.embedding.output_dim
    params = _unpack(model.theta, arch, in_dim)
    y = cache["output"]

    grad = np.zeros_like(model.theta)
    grads = _unpack(grad, arch, in_dim)  # views into grad

    dvalues = np.asarray(dvalues, dtype=model.theta.dtype)
    dz = (dvalues * y * (1.0 - y))[:, None]
    w_out, _ = params[-1]
    gw_out, gb_out = grads[-1]
    gw_out += cache["last_hidden"].T @ dz
    gb_out += dz.sum(axis=0)
    dx = dz @ w_out.T

    for i in range(arch.depth - 1, -1, -1):
        dz = _chain_activation_grad(dx, cache["preacts"][i], cache["saved"][i], arch)
        w, _ = params[i]
        gw, gb = grads[i]
        gw += cache["layer_inputs"][i].T @ dz
        gb += dz.sum(axis=0)
        if i > 0:
            dx = dz @ w.T
            if dropout_mask is not None:
                dx *= (dropout_mask.masks[i] / (1.0 - dropout_mask.p)).astype(dx.dtype)
    return grad


def forward(
    model: InrModel,
    coords: np.ndarray,
    dropout_mask: DropoutMask | None = None,
) -> np.ndarray:
    """Pixel values in (0, 1) at coordinates in the unit square, shape ``(P,)``."""
    features = embed(coords, model.embedding)
    values, _ = forward_features(model, features, dropout_mask)
    return values


def render_image(
    model: InrModel,
    image_shape: tuple[int, int],
    dropout_mask: DropoutMask | None = None,
) -> np.ndarray:
    """Evaluate the network at every pixel center of a ``(height, width)`` grid."""
    coords = normalized_pixel_centers(image_shape)
    return forward(model, coords, dropout_mask).reshape(image_shape)
