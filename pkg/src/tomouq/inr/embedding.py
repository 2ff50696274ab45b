"""Fixed sinusoidal coordinate embeddings.

``rff`` draws an ``m x 2`` frequency matrix ``B`` with entries
``N(0, omega0^2)`` and maps a coordinate ``x`` in the unit square to
``[cos(2 pi B x), sin(2 pi B x)]`` (cosine block first, then sine, output
dimension ``2 m``).  ``positional`` uses the deterministic log-spaced ladder
``omega0^(j/m)`` applied per input axis.  ``none`` passes coordinates
through unchanged.  The matrix is frozen at initialization and fully
reproducible from ``(kind, m, omega0, seed)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Embedding", "make_embedding", "embed"]

EMBEDDING_KINDS = ("rff", "positional", "none")


@dataclass(frozen=True)
class Embedding:
    kind: str
    m: int
    omega0: float
    seed: int
    matrix_b: np.ndarray = field(repr=False, compare=False)

    @property
    def output_dim(self) -> int:
        if self.kind == "none":
            return 2
        return 2 * self.matrix_b.shape[0]


def _frequency_matrix(kind: str, m: int, omega0: float, seed: int) -> np.ndarray:
    if kind == "rff":
        rng = np.random.default_rng(seed)
        return rng.normal(0.0, omega0, size=(m, 2))
    if kind == "positional":
        # One row per (frequency, axis) pair: omega0^(j/m) on x then on y.
        freqs = omega0 ** (np.arange(m) / m)
        rows = np.zeros((2 * m, 2))
        rows[:m, 0] = freqs
        rows[m:, 1] = freqs
        return rows
    return np.empty((0, 2))


def make_embedding(kind: str, m: int = 256, omega0: float = 10.0, seed: int = 0) -> Embedding:
    """Initialize (and freeze) an embedding of the requested kind."""
    if kind not in EMBEDDING_KINDS:
        raise ValueError(f"unknown embedding kind {kind!r}, expected one of {EMBEDDING_KINDS}")
    if kind != "none" and m < 1:
        raise ValueError(f"embedding size m must be >= 1, got {m}")
    return Embedding(kind=kind, m=m, omega0=omega0, seed=seed,
                     matrix_b=_frequency_matrix(kind, m, omega0, seed))


def embed(coords: np.ndarray, emb: Embedding) -> np.ndarray:
    """Feature matrix for coordinates in the unit square.

    Parameters
    ----------
    coords : ndarray, shape (P, 2)
    emb : Embedding

    Returns
    -------
    ndarray, shape (P, output_dim)
        Values in [-1, 1] for the sinusoidal kinds; the coordinates
        themselves for ``kind="none"``.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    if emb.kind == "none":
        return coords
    phase = 2.0 * np.pi * (coords @ emb.matrix_b.T)
    return np.concatenate([np.cos(phase), np.sin(phase)], axis=1)
