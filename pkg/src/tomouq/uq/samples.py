"""Containers and reductions for sampled reconstructions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import FormatError, ShapeError

__all__ = [
    "PosteriorSamples",
    "posterior_mean",
    "posterior_variance",
    "save_samples",
    "load_samples",
]


@dataclass
class PosteriorSamples:
    """A stack of sampled images sharing one shape.

    ``values`` has shape ``(n, height, width)``; ``method_tag`` records the
    sampler that produced them and ``seeds`` the RNG seeds involved.
    """

    values: np.ndarray
    method_tag: str
    seeds: tuple[int, ...] = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 3:
            raise ShapeError(f"samples must be (n, height, width), got {self.values.shape}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def image_shape(self) -> tuple[int, int]:
        return self.values.shape[1:]


def posterior_mean(samples: PosteriorSamples) -> np.ndarray:
    """Pixelwise mean of the sampled reconstructions."""
    return samples.values.mean(axis=0)


def posterior_variance(samples: PosteriorSamples) -> np.ndarray:
    """Pixelwise unbiased variance (``n - 1`` denominator) of the samples."""
    if samples.n < 2:
        raise ValueError("variance needs at least 2 samples")
    return samples.values.var(axis=0, ddof=1)


def save_samples(directory, samples: PosteriorSamples) -> None:
    """Write one raw little-endian float64 file per sample plus an index manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for i in range(samples.n):
        name = f"sample_{i:05d}.f64"
        samples.values[i].astype("<f8").tofile(directory / name)
        files.append(name)
    manifest = {
        "method_tag": samples.method_tag,
        "n": samples.n,
        "height": int(samples.image_shape[0]),
        "width": int(samples.image_shape[1]),
        "seeds": list(samples.seeds),
        "files": files,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_samples(directory) -> PosteriorSamples:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise FormatError(f"{directory}: missing manifest.json")
    manifest = json.loads(manifest_path.read_text())
    shape = (manifest["height"], manifest["width"])
    stack = np.empty((manifest["n"], *shape))
    for i, name in enumerate(manifest["files"]):
        data = np.fromfile(directory / name, dtype="<f8")
        if data.size != shape[0] * shape[1]:
            raise FormatError(f"{name}: expected {shape[0] * shape[1]} values, got {data.size}")
        stack[i] = data.reshape(shape)
    return PosteriorSamples(
        values=stack,
        method_tag=manifest["method_tag"],
        seeds=tuple(manifest["seeds"]),
    )
