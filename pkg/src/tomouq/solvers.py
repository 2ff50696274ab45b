"""Analytic and iterative reconstruction baselines.

All iterative solvers start from a zero image (ones for the multiplicative
EM scheme), run a fixed iteration budget, and return a :class:`SolverResult`
whose ``status`` records early stops.  An optional :class:`IterationTrace`
appends one CSV row per iteration (residual norm, and reconstruction quality
when a ground-truth image is attached).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError
from .geometry import ProjectionGeometry
from .radon import RadonOperator
from .sinogram import Sinogram

__all__ = [
    "SolverConfig",
    "SolverResult",
    "IterationTrace",
    "fbp",
    "sirt",
    "sart",
    "cgls",
    "em",
]


@dataclass
class SolverConfig:
    """Shared knobs of the iterative solvers.

    ``relaxation`` is the per-sweep damping of the view-by-view scheme,
    ``epsilon_guard`` protects divisions by empty row/column sums, and
    ``nonneg_projection`` clamps each iterate at zero.
    """

    max_iters: int = 200
    relaxation: float = 1.0
    epsilon_guard: float = 1e-12
    nonneg_projection: bool = True

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (0.0 < self.relaxation < 2.0):
            raise ValueError(f"relaxation must be in (0, 2), got {self.relaxation}")
        if not (self.epsilon_guard > 0.0):
            raise ValueError("epsilon_guard must be positive")


@dataclass
class SolverResult:
    """Reconstruction plus bookkeeping from an iterative solve."""

    image: np.ndarray
    iterations: int
    status: str = "max_iters"  # or converged / breakdown / frozen-pixels
    residual_norm: float = float("nan")


class IterationTrace:
    """CSV sink for per-iteration diagnostics.

    Writes ``iteration,residual`` rows, plus a ``psnr`` column when a
    reference image is supplied.
    """

    def __init__(self, path, reference: np.ndarray | None = None):
        self.path = path
        self.reference = reference
        self._rows: list[tuple] = []

    def record(self, iteration: int, residual: float, image: np.ndarray) -> None:
        if self.reference is not None:
            from .metrics import psnr

            self._rows.append((iteration, residual, psnr(self.reference, image)))
        else:
            self._rows.append((iteration, residual))

    def flush(self) -> None:
        header = ["iteration", "residual"]
        if self.reference is not None:
            header.append("psnr")
        with open(self.path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(self._rows)


def _check_pair(op: RadonOperator, sino: Sinogram) -> None:
    expected = (op.geometry.n_views, op.geometry.n_detectors)
    if sino.values.shape != expected:
        from .errors import ShapeError

        raise ShapeError(f"sinogram {sino.values.shape} does not match operator {expected}")


# ---------------------------------------------------------------------------
# Filtered backprojection
# ---------------------------------------------------------------------------


def _ramp_filter_views(values: np.ndarray, spacing: float) -> np.ndarray:
    """Frequency-domain |w| filtering of each view along the detector axis."""
    n_det = values.shape[1]
    nfft = 1
    while nfft < 2 * n_det:
        nfft *= 2
    freqs = np.abs(np.fft.rfftfreq(nfft, d=spacing))
    spectra = np.fft.rfft(values, n=nfft, axis=1)
    filtered = np.fft.irfft(spectra * freqs, n=nfft, axis=1)
    return filtered[:, :n_det]


def fbp(
    sino: Sinogram,
    geom: ProjectionGeometry | None = None,
    filter_name: str = "ram-lak",
    *,
    op: RadonOperator | None = None,
    image_shape: tuple[int, int] | None = None,
    clip_range: tuple[float, float] | None = (0.0, 1.0),
) -> np.ndarray:
    """Filtered backprojection (``filter_name="ram-lak"``) or plain backprojection (``"none"``).

    Each view is filtered in the frequency domain by ``|w|`` (zero-padded FFT
    of length the next power of two at or above twice the detector count),
    backprojected through the operator transpose, and scaled by
    ``pi / n_views`` times the detector spacing so the result approximates the
    continuous inversion formula on unit pixels.  The output is finally
    projected onto the physical attenuation range (``clip_range``, pass
    ``None`` for the raw filtered backprojection); ramp-filter ringing
    otherwise leaves negative streaks that no attenuation image can contain.

    One of ``op`` or ``image_shape`` must be given; ``op`` is built on the fly
    from the geometry otherwise.
    """
    geom = geom if geom is not None else sino.geometry
    if geom.n_detectors < 2:
        raise GeometryError("filtered backprojection needs at least 2 detector bins")
    if filter_name not in ("ram-lak", "none"):
        raise ValueError(f"unknown filter {filter_name!r}, expected 'ram-lak' or 'none'")
    if op is None:
        if image_shape is None:
            raise ValueError("fbp needs either a prebuilt operator or an image_shape")
        from .radon import build_radon_operator

        op = build_radon_operator(geom, image_shape)
    _check_pair(op, sino)

    if filter_name == "ram-lak":
        values = _ramp_filter_views(sino.values, geom.detector_spacing)
    else:
        values = sino.values
    scale = np.pi / geom.n_views * geom.detector_spacing
    image = scale * op.apply_adjoint(values)
    if clip_range is not None:
        np.clip(image, clip_range[0], clip_range[1], out=image)
    return image


# ---------------------------------------------------------------------------
# Iterative schemes
# ---------------------------------------------------------------------------


def sirt(
    op: RadonOperator,
    sino: Sinogram,
    cfg: SolverConfig,
    trace: IterationTrace | None = None,
) -> SolverResult:
    """Simultaneous iterative scheme using all rays per update.

    Update: ``f += B A^T D (S - A f)`` with ``D`` the inverse ray lengths
    (row sums) and ``B`` the inverse pixel coverage (column sums); empty rows
    and columns fall back to ``epsilon_guard``.
    """
    _check_pair(op, sino)
    d_inv = 1.0 / np.maximum(op.row_sums, cfg.epsilon_guard)
    b_inv = 1.0 / np.maximum(op.col_sums, cfg.epsilon_guard)
    s = sino.values.ravel()
    f = np.zeros(op.n_pixels)
    residual = np.inf
    for k in range(cfg.max_iters):
        r = s - op.matrix @ f
        f = f + b_inv * (op.matrix.T @ (d_inv * r))
        if cfg.nonneg_projection:
            np.maximum(f, 0.0, out=f)
        residual = float(np.linalg.norm(r))
        if trace is not None:
            trace.record(k, residual, f.reshape(op.image_shape))
    if trace is not None:
        trace.flush()
    return SolverResult(f.reshape(op.image_shape), cfg.max_iters, "max_iters", residual)


def sart(
    op: RadonOperator,
    sino: Sinogram,
    cfg: SolverConfig,
    trace: IterationTrace | None = None,
    relaxation_schedule=None,
) -> SolverResult:
    """View-by-view variant of :func:`sirt`.

    One sweep visits every view in order 0..n_views-1 and applies the damped
    update restricted to that view's rays; ``cfg.max_iters`` counts full
    sweeps.  ``relaxation_schedule(sweep_index)`` overrides the fixed
    ``cfg.relaxation`` when given.
    """
    _check_pair(op, sino)
    geom = op.geometry
    s = sino.values.ravel()
    row_inv = 1.0 / np.maximum(op.row_sums, cfg.epsilon_guard)

    # Per-view sub-operator and its column sums, extracted once.
    views = []
    for v in range(geom.n_views):
        rows = op.view_rows(v)
        block = op.matrix[rows]
        col_inv = 1.0 / np.maximum(np.asarray(block.sum(axis=0)).ravel(), cfg.epsilon_guard)
        views.append((block, s[rows], row_inv[rows], col_inv))

    f = np.zeros(op.n_pixels)
    residual = np.inf
    for sweep in range(cfg.max_iters):
        lam = cfg.relaxation if relaxation_schedule is None else float(relaxation_schedule(sweep))
        for block, s_v, d_v, b_v in views:
            r = s_v - block @ f
            f = f + lam * b_v * (block.T @ (d_v * r))
            if cfg.nonneg_projection:
                np.maximum(f, 0.0, out=f)
        residual = float(np.linalg.norm(s - op.matrix @ f))
        if trace is not None:
            trace.record(sweep, residual, f.reshape(op.image_shape))
    if trace is not None:
        trace.flush()
    return SolverResult(f.reshape(op.image_shape), cfg.max_iters, "max_iters", residual)


def cgls(
    op: RadonOperator,
    sino: Sinogram,
    cfg: SolverConfig,
    trace: IterationTrace | None = None,
    rel_tol: float = 1e-10,
) -> SolverResult:
    """Conjugate-gradient iteration on the normal equations ``A^T A f = A^T S``.

    Stops at ``cfg.max_iters``, when the normal-equation residual drops below
    ``rel_tol`` times its initial norm, or on numerical breakdown of the
    curvature term (flagged in ``status``).  The trace records the data
    residual ``||S - A f||``, which the iteration minimizes over its expanding
    search space and which is therefore nonincreasing (the normal-equation
    residual itself oscillates, as is typical of conjugate-gradient schemes).
    """
    _check_pair(op, sino)
    A = op.matrix
    s = sino.values.ravel()
    f = np.zeros(op.n_pixels)
    r = s.copy()  # S - A f with f = 0
    e = A.T @ r  # normal-equation residual
    q = e.copy()
    gamma = float(e @ e)
    gamma0 = gamma
    status = "max_iters"
    k = 0
    for k in range(1, cfg.max_iters + 1):
        Aq = A @ q
        curv = float(Aq @ Aq)
        if curv <= 0.0:
            status = "breakdown"
            k -= 1
            break
        alpha = gamma / curv
        f += alpha * q
        r -= alpha * Aq
        e = A.T @ r
        gamma_new = float(e @ e)
        if trace is not None:
            trace.record(k, float(np.linalg.norm(r)), f.reshape(op.image_shape))
        if gamma_new <= (rel_tol**2) * gamma0:
            gamma = gamma_new
            status = "converged"
            break
        q = e + (gamma_new / gamma) * q
        gamma = gamma_new
    if trace is not None:
        trace.flush()
    return SolverResult(f.reshape(op.image_shape), k, status, float(np.sqrt(gamma)))


def em(
    op: RadonOperator,
    sino: Sinogram,
    cfg: SolverConfig,
    trace: IterationTrace | None = None,
) -> SolverResult:
    """Multiplicative maximum-likelihood iteration for counting statistics.

    ``f_j <- (f_j / colsum_j) * [A^T (S / (A f))]_j`` from a uniform positive
    start; measurements are clamped at zero and all denominators use
    ``epsilon_guard``.  Pixels in empty operator columns stay at their
    initialization and flip ``status`` to ``frozen-pixels``.
    """
    _check_pair(op, sino)
    A = op.matrix
    s = np.maximum(sino.values.ravel(), 0.0)
    col = op.col_sums
    dead = col <= 0.0
    col_inv = 1.0 / np.maximum(col, cfg.epsilon_guard)

    f = np.ones(op.n_pixels)
    residual = np.inf
    for k in range(cfg.max_iters):
        proj = A @ f
        ratio = s / np.maximum(proj, cfg.epsilon_guard)
        update = col_inv * (A.T @ ratio)
        f = f * update
        f[dead] = 1.0
        residual = float(np.linalg.norm(s - proj))
        if trace is not None:
            trace.record(k, residual, f.reshape(op.image_shape))
    if trace is not None:
        trace.flush()
    status = "frozen-pixels" if bool(np.any(dead)) else "max_iters"
    return SolverResult(f.reshape(op.image_shape), cfg.max_iters, status, residual)
