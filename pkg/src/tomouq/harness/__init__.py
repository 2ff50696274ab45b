"""Config-driven experiment runner, sweeps, image ingestion, and the CLI."""

from .config import (
    ExperimentConfig,
    child_seed,
    config_from_mapping,
    config_hash,
    example_config,
    load_config,
)
from .ingest import bilinear_resample, center_crop, ingest_image
from .run import RunManifest, StageFailure, run_experiment
from .sweep import SweepResult, run_sweep

__all__ = [
    "ExperimentConfig",
    "config_from_mapping",
    "load_config",
    "config_hash",
    "child_seed",
    "example_config",
    "ingest_image",
    "center_crop",
    "bilinear_resample",
    "RunManifest",
    "StageFailure",
    "run_experiment",
    "SweepResult",
    "run_sweep",
]
