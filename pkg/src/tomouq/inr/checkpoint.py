"""Binary model checkpoints.

Layout: 4-byte magic ``INRC``, uint32 little-endian header length, a UTF-8
JSON header (architecture fields, embedding kind/size/frequency/seed, and the
parameter count), then the flat parameter vector as little-endian float64.
The embedding matrix is not stored; it is regenerated from its seed.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from ..errors import FormatError
from .embedding import make_embedding
from .network import InrModel, MlpArchitecture

__all__ = ["save_model", "load_model"]

_MAGIC = b"INRC"


def save_model(path, model: InrModel) -> None:
    header = {
        "arch": {
            "depth": model.arch.depth,
            "width": model.arch.width,
            "activation": model.arch.activation,
            "sine_omega": model.arch.sine_omega,
            "dropout_p": model.arch.dropout_p,
        },
        "embedding": {
            "kind": model.embedding.kind,
            "m": model.embedding.m,
            "omega0": model.embedding.omega0,
            "seed": model.embedding.seed,
        },
        "n_params": int(model.theta.size),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(model.theta.astype("<f8").tobytes())


def load_model(path) -> InrModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise FormatError(f"{path}: not a model checkpoint")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        payload = fh.read(header["n_params"] * 8)
    if len(payload) != header["n_params"] * 8:
        raise FormatError(f"{path}: truncated parameter block")
    arch = MlpArchitecture(**header["arch"])
    emb = make_embedding(**header["embedding"])
    theta = np.frombuffer(payload, dtype="<f8").copy()
    return InrModel(embedding=emb, arch=arch, theta=theta)
