"""Single-experiment pipeline: data -> project -> noise -> reconstruct -> metrics -> export."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import image_io
from ..calibration import (
    PixelDistributions,
    default_coverage_grid,
    default_delta_candidates,
    optimize_delta,
)
from ..errors import TomouqError
from ..geometry import geometry_for_image
from ..gop import GopConfig, gop_tv_map
from ..inr import InrModel, MlpArchitecture, TrainConfig, make_embedding, render_image, train
from ..metrics import mse, nll, psnr, snr
from ..phantom import generate_shepp_logan, shepp_logan_spec
from ..radon import build_radon_operator, forward_project
from ..sinogram import add_noise
from ..solvers import SolverConfig, cgls, em, fbp, sart, sirt
from ..uq import (
    PosteriorSamples,
    bbb_init,
    bbb_sample,
    bbb_train,
    ensemble_sample,
    gop_target,
    hmc_sample,
    inr_target,
    mcd_sample,
    posterior_mean,
    posterior_variance,
    prior_tau2_from_width,
    save_samples,
    train_mcd_ensemble,
)
from ..uq.hmc import HmcConfig
from .config import ExperimentConfig, child_seed, config_hash
from .ingest import ingest_image

__all__ = ["RunManifest", "StageFailure", "run_experiment"]


class StageFailure(TomouqError):
    """Wraps an error from one pipeline stage, preserving the stage label."""

    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"[stage:{stage}] {original}")
        self.stage = stage
        self.original = original


@dataclass
class RunManifest:
    """Everything needed to audit or reproduce a finished run."""

    config_hash: str
    method: str
    seeds: dict
    wall_clock_s: float
    metrics: dict
    files: list[str] = field(default_factory=list)
    statuses: dict = field(default_factory=dict)
    variance_scale: float | None = None

    def to_dict(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "method": self.method,
            "seeds": self.seeds,
            "wall_clock_s": self.wall_clock_s,
            "metrics": self.metrics,
            "files": self.files,
            "statuses": self.statuses,
            "variance_scale": self.variance_scale,
        }


class _Stage:
    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageFailure):
            raise StageFailure(self.name, exc) from exc
        return False


def _resolve_sigma2(configured: float | None, injected: float | None) -> float:
    if injected is not None:
        return injected
    if configured is not None:
        return configured
    return 1.0


def _train_config(cfg: ExperimentConfig, sigma2: float, seed: int) -> TrainConfig:
    i = cfg.inr
    return TrainConfig(
        optimizer=i.optimizer,
        lr=i.lr,
        weight_decay=i.weight_decay,
        epochs=i.epochs,
        tv_lambda=i.tv_lambda,
        tv_variant=i.tv_variant,
        noise_sigma2=sigma2,
        prior_tau2=i.prior_tau2 if i.prior_tau2 is not None else float("inf"),
        temperature=i.temperature,
        seed=seed,
    )


def _arch_and_embedding(cfg: ExperimentConfig, seed: int, dropout_override: float | None = None):
    i = cfg.inr
    dropout = i.dropout_p if dropout_override is None else dropout_override
    arch = MlpArchitecture(
        depth=i.depth,
        width=i.width,
        activation=i.activation,
        sine_omega=i.sine_omega,
        dropout_p=dropout,
    )
    m = i.embedding_m if i.embedding_m is not None else max(256, cfg.data.size)
    emb = make_embedding(i.embedding, m=m, omega0=i.omega0, seed=child_seed(seed, "embedding"))
    return arch, emb


def _reconstruct(cfg, op, sino, truth_shape, seeds, statuses, extras):
    """Dispatch on the configured method.

    Returns ``(mean_image, samples_or_None)``.
    """
    method = cfg.method

    if method in ("fbp", "bp"):
        filter_name = "ram-lak" if method == "fbp" else "none"
        return fbp(sino, op.geometry, filter_name, op=op), None

    if method in ("sirt", "sart", "cgls", "em"):
        solver_cfg = SolverConfig(
            max_iters=cfg.solver.max_iters,
            relaxation=cfg.solver.relaxation,
            epsilon_guard=cfg.solver.epsilon_guard,
            nonneg_projection=cfg.solver.nonneg_projection,
        )
        solve = {"sirt": sirt, "sart": sart, "cgls": cgls, "em": em}[method]
        result = solve(op, sino, solver_cfg)
        statuses["solver"] = result.status
        return result.image, None

    if method in ("gop-tv", "gop-hmc"):
        gop_cfg = GopConfig(
            tv_lambda=cfg.gop.tv_lambda,
            tv_variant=cfg.gop.tv_variant,
            step_size=cfg.gop.step_size,
            noise_sigma2=_resolve_sigma2(cfg.gop.noise_sigma2, sino.noise_sigma2),
            max_iters=cfg.gop.max_iters,
        )
        map_image = gop_tv_map(op, sino, gop_cfg)
        if method == "gop-tv":
            return map_image, None
        h = cfg.hmc
        hmc_cfg = HmcConfig(
            n_samples=h.n_samples,
            burn_in=h.burn_in,
            thinning=h.thinning,
            step_size=h.step_size,
            leapfrog_steps=h.leapfrog_steps,
            temperature=h.temperature,
            init=h.init,
            seed=seeds["sampling"],
        )
        if h.init == "map-checkpoint":
            x0 = map_image.ravel()
        else:
            x0 = np.random.default_rng(seeds["sampling"]).uniform(0, 1, op.n_pixels)
        result = hmc_sample(gop_target(op, sino, gop_cfg), op.n_pixels, hmc_cfg, x0=x0)
        statuses["hmc_acceptance_rate"] = result.acceptance_rate
        extras["hmc_delta_h"] = result.delta_h
        stack = result.samples.reshape(-1, *op.image_shape)
        samples = PosteriorSamples(stack, method_tag=method, seeds=(seeds["sampling"],))
        return posterior_mean(samples), samples

    # Coordinate-network methods.
    train_sigma2 = _resolve_sigma2(cfg.inr.noise_sigma2, sino.noise_sigma2)

    if method == "inr":
        arch, emb = _arch_and_embedding(cfg, seeds["train"])
        result = train(op, sino, arch, emb, _train_config(cfg, train_sigma2, seeds["train"]))
        extras["loss_trace"] = result.losses
        return render_image(result.model, truth_shape), None

    if method == "mcd-uinr":
        arch, emb = _arch_and_embedding(cfg, seeds["train"])
        result = train(op, sino, arch, emb, _train_config(cfg, train_sigma2, seeds["train"]))
        extras["loss_trace"] = result.losses
        samples = mcd_sample(result.model, cfg.uq.n_samples, truth_shape, seeds["sampling"])
        return posterior_mean(samples), samples

    if method in ("de-uinr", "de-mcd-uinr"):
        dropout = 0.0 if method == "de-uinr" else None
        arch, emb = _arch_and_embedding(cfg, seeds["train"], dropout_override=dropout)
        members = train_mcd_ensemble(
            op,
            sino,
            arch,
            emb,
            _train_config(cfg, train_sigma2, seeds["train"]),
            m=cfg.uq.ensemble_size,
            n_workers=cfg.uq.workers,
        )
        samples = ensemble_sample(members, cfg.uq.n_samples, truth_shape, seeds["sampling"])
        samples = replace(samples, method_tag=method)
        return posterior_mean(samples), samples

    if method == "bbb-uinr":
        arch, emb = _arch_and_embedding(cfg, seeds["train"], dropout_override=0.0)
        bbb0 = bbb_init(
            arch,
            emb,
            prior_sigma=cfg.bbb.prior_sigma,
            kl_factor=cfg.bbb.kl_factor,
            seed=seeds["train"],
            rho0=cfg.bbb.rho0,
        )
        model, losses = bbb_train(
            op, sino, arch, emb, _train_config(cfg, train_sigma2, seeds["train"]), bbb0
        )
        extras["loss_trace"] = losses
        samples = bbb_sample(model, cfg.uq.n_samples, truth_shape, seeds["sampling"])
        return posterior_mean(samples), samples

    if method == "hmc-uinr":
        arch, emb = _arch_and_embedding(cfg, seeds["train"], dropout_override=0.0)
        tau2 = cfg.inr.prior_tau2
        if tau2 is None:
            tau2 = prior_tau2_from_width(cfg.hmc.gamma, cfg.inr.width)
        train_cfg = replace(_train_config(cfg, train_sigma2, seeds["train"]), prior_tau2=tau2)
        map_result = train(op, sino, arch, emb, train_cfg)
        extras["loss_trace"] = map_result.losses
        template = map_result.model
        h = cfg.hmc
        hmc_cfg = HmcConfig(
            n_samples=h.n_samples,
            burn_in=h.burn_in,
            thinning=h.thinning,
            step_size=h.step_size,
            leapfrog_steps=h.leapfrog_steps,
            temperature=h.temperature,
            init=h.init,
            seed=seeds["sampling"],
        )
        if h.init == "map-checkpoint":
            x0 = template.theta.copy()
        else:
            rng = np.random.default_rng(seeds["sampling"])
            x0 = rng.normal(0.0, np.sqrt(tau2), size=template.theta.size)
        result = hmc_sample(
            inr_target(template, op, sino, train_cfg), template.theta.size, hmc_cfg, x0=x0
        )
        statuses["hmc_acceptance_rate"] = result.acceptance_rate
        extras["hmc_delta_h"] = result.delta_h
        stack = np.stack(
            [
                render_image(InrModel(template.embedding, template.arch, theta), truth_shape)
                for theta in result.samples
            ]
        )
        samples = PosteriorSamples(stack, method_tag=method, seeds=(seeds["sampling"],))
        return posterior_mean(samples), samples

    raise ValueError(f"unhandled method {method!r}")  # pragma: no cover


def _export_images(out_dir: Path, name: str, image: np.ndarray, files: list[str]) -> None:
    image_io.save_pgm(out_dir / f"{name}.pgm", image, bit_depth=16)
    image_io.save_png_preview(out_dir / f"{name}.png", image)
    files.extend([f"{name}.pgm", f"{name}.png"])


def run_experiment(cfg: ExperimentConfig) -> RunManifest:
    """Execute one configured experiment and write all artifacts.

    Emits (per the method's capabilities): the reconstructed mean image, the
    predictive-variance image, the absolute-error image, the coverage-quantile
    map, a reliability CSV, ``metrics.json``, and ``manifest.json``.  Fully
    reproducible from the configuration (byte-identical ``metrics.json`` on
    rerun).
    """
    started = time.time()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    seeds = {
        "master": cfg.seed,
        "noise": child_seed(cfg.seed, "noise"),
        "train": child_seed(cfg.seed, "train"),
        "sampling": child_seed(cfg.seed, "sampling"),
    }
    statuses: dict = {}
    extras: dict = {}
    files: list[str] = []

    with _Stage("data"):
        if cfg.data.source == "phantom":
            truth = generate_shepp_logan(
                shepp_logan_spec(cfg.data.size, variant_seed=cfg.data.variant_seed)
            )
        else:
            truth = ingest_image(cfg.data.path, target_size=cfg.data.size)
    height, width = truth.shape

    with _Stage("project"):
        geom = geometry_for_image(
            width,
            height,
            n_views=cfg.geometry.n_views,
            n_detectors=cfg.geometry.n_detectors,
            detector_spacing=cfg.geometry.detector_spacing,
            padded_size=cfg.geometry.padded_size,
        )
        op = build_radon_operator(geom, truth.shape)
        sino = forward_project(op, truth)

    with _Stage("noise"):
        if cfg.noise_snr_db is not None and not np.isinf(cfg.noise_snr_db):
            sino = add_noise(sino, cfg.noise_snr_db, seeds["noise"])
            statuses["noise_sigma2"] = sino.noise_sigma2

    with _Stage("reconstruct"):
        mean_image, samples = _reconstruct(
            cfg, op, sino, truth.shape, seeds, statuses, extras
        )

    with _Stage("metrics"):
        results = {
            "psnr": psnr(truth, mean_image),
            "snr": snr(truth, mean_image),
            "mse": mse(truth, mean_image),
        }
        var_image = None
        quantile_map = None
        reliability = None
        if samples is not None:
            var_image = posterior_variance(samples)
            results["nll"] = nll(mean_image, var_image, truth, cfg.metrics.var_floor)
            results["nll_mean"] = nll(
                mean_image, var_image, truth, cfg.metrics.var_floor, reduction="mean"
            )
            dists = PixelDistributions.from_samples(samples)
            report = optimize_delta(
                dists,
                truth,
                grid=default_coverage_grid(cfg.metrics.coverage_points),
                delta_candidates=default_delta_candidates(cfg.metrics.delta_candidates),
            )
            results["ece"] = report.ece
            results["delta"] = report.delta
            results["n_samples"] = samples.n
            quantile_map = report.coverage_quantiles
            reliability = report.reliability

    with _Stage("export"):
        variance_scale = None
        _export_images(out_dir, "mean", mean_image, files)
        _export_images(out_dir, "abs_error", np.abs(mean_image - truth), files)
        if var_image is not None:
            peak = float(var_image.max())
            variance_scale = peak if peak > 0 else 1.0
            _export_images(out_dir, "variance", var_image / variance_scale, files)
            image_io.save_raw_image(out_dir / "variance.f64", var_image)
            files.append("variance.f64")
        if quantile_map is not None:
            # Never-covered pixels (NaN) export as white, past the 0..0.99 grid.
            image_io.save_pgm(
                out_dir / "coverage_quantile.pgm",
                np.where(np.isnan(quantile_map), 1.0, quantile_map),
                bit_depth=16,
            )
            files.append("coverage_quantile.pgm")
        if reliability is not None:
            lines = ["target_coverage,achieved_coverage"]
            lines += [f"{p:.6f},{ac:.6f}" for p, ac in reliability]
            (out_dir / "reliability.csv").write_text("\n".join(lines) + "\n")
            files.append("reliability.csv")
        if "loss_trace" in extras:
            lines = ["epoch,loss"]
            lines += [f"{i},{v!r}" for i, v in enumerate(extras["loss_trace"])]
            (out_dir / "loss_trace.csv").write_text("\n".join(lines) + "\n")
            files.append("loss_trace.csv")
        if "hmc_delta_h" in extras:
            lines = ["iteration,delta_h"]
            lines += [f"{i},{v!r}" for i, v in enumerate(extras["hmc_delta_h"])]
            (out_dir / "hmc_diagnostics.csv").write_text("\n".join(lines) + "\n")
            files.append("hmc_diagnostics.csv")
        if samples is not None and cfg.export.save_samples:
            save_samples(out_dir / "samples", samples)
            files.append("samples/")
        metrics_blob = json.dumps(results, sort_keys=True, indent=2)
        (out_dir / "metrics.json").write_text(metrics_blob + "\n")
        files.append("metrics.json")

    manifest = RunManifest(
        config_hash=config_hash(cfg),
        method=cfg.method,
        seeds=seeds,
        wall_clock_s=time.time() - started,
        metrics=results,
        files=files,
        statuses=statuses,
        variance_scale=variance_scale,
    )
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest.to_dict(), sort_keys=True, indent=2) + "\n"
    )
    return manifest
