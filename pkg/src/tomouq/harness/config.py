"""Experiment configuration: parsing, validation, hashing, seed derivation.

A run is described by one human-readable YAML mapping (see ``example_config``
for the full tree).  Validation failures raise :class:`ConfigError` naming
the offending field by its dotted path.  The configuration hash is the
SHA-256 of the canonical JSON form, and every stage seed is derived from the
master seed plus a stage label, so reruns and sweep children are reproducible
and order-independent.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import yaml

from ..errors import ConfigError

__all__ = [
    "METHODS",
    "ExperimentConfig",
    "load_config",
    "config_from_mapping",
    "config_hash",
    "child_seed",
    "example_config",
]

METHODS = (
    "fbp",
    "bp",
    "sirt",
    "sart",
    "cgls",
    "em",
    "gop-tv",
    "gop-hmc",
    "inr",
    "mcd-uinr",
    "de-uinr",
    "de-mcd-uinr",
    "bbb-uinr",
    "hmc-uinr",
)

UQ_METHODS = ("gop-hmc", "mcd-uinr", "de-uinr", "de-mcd-uinr", "bbb-uinr", "hmc-uinr")


@dataclass
class DataConfig:
    source: str = "phantom"  # phantom | image
    size: int = 128
    variant_seed: int | None = None
    path: str | None = None


@dataclass
class GeometryConfig:
    n_views: int = 20
    n_detectors: int | None = None
    detector_spacing: float = 1.0
    padded_size: int | None = None


@dataclass
class SolverSection:
    max_iters: int = 200
    relaxation: float = 1.0
    epsilon_guard: float = 1e-12
    nonneg_projection: bool = True


@dataclass
class GopSection:
    tv_lambda: float = 0.5
    tv_variant: str = "isotropic-exact"
    step_size: float = 2e-4
    noise_sigma2: float | None = None
    max_iters: int = 500


@dataclass
class InrSection:
    activation: str = "silu"
    depth: int = 3
    width: int = 128
    sine_omega: float = 30.0
    dropout_p: float = 0.2
    embedding: str = "rff"
    embedding_m: int | None = None
    omega0: float = 9.0
    optimizer: str = "adam"
    lr: float = 1.5e-3
    weight_decay: float = 0.0
    epochs: int = 1200
    tv_lambda: float = 0.01
    tv_variant: str = "anisotropic"
    noise_sigma2: float | None = None
    prior_tau2: float | None = None
    temperature: float = 1.0
    precision: str = "float64"  # forward/backward compute dtype during training


@dataclass
class UqSection:
    n_samples: int = 50
    ensemble_size: int = 5
    workers: int = 1


@dataclass
class BbbSection:
    prior_sigma: float = 100.0
    kl_factor: float = 1e-5
    rho0: float = -5.0


@dataclass
class HmcSection:
    n_samples: int = 1000
    burn_in: int = 500
    thinning: int = 5
    step_size: float = 1e-3
    leapfrog_steps: int = 10
    temperature: float = 1.0
    init: str = "map-checkpoint"
    gamma: float = 0.2  # width-scaled weight-prior heuristic when prior_tau2 unset


@dataclass
class MetricsSection:
    var_floor: float = 1e-12
    coverage_points: int = 99
    delta_candidates: int = 30


@dataclass
class ExportSection:
    save_samples: bool = False


@dataclass
class ExperimentConfig:
    method: str = "fbp"
    seed: int = 0
    output_dir: str = "runs/out"
    name: str = ""
    noise_snr_db: float | None = None
    data: DataConfig = field(default_factory=DataConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    solver: SolverSection = field(default_factory=SolverSection)
    gop: GopSection = field(default_factory=GopSection)
    inr: InrSection = field(default_factory=InrSection)
    uq: UqSection = field(default_factory=UqSection)
    bbb: BbbSection = field(default_factory=BbbSection)
    hmc: HmcSection = field(default_factory=HmcSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)
    export: ExportSection = field(default_factory=ExportSection)

    def canonical(self) -> dict:
        """JSON-ready mapping with deterministic ordering."""
        return json.loads(json.dumps(asdict(self), sort_keys=True))


_SECTIONS = {
    "data": DataConfig,
    "geometry": GeometryConfig,
    "solver": SolverSection,
    "gop": GopSection,
    "inr": InrSection,
    "uq": UqSection,
    "bbb": BbbSection,
    "hmc": HmcSection,
    "metrics": MetricsSection,
    "export": ExportSection,
}


def _build_section(cls, mapping: dict, prefix: str):
    known = {f for f in cls.__dataclass_fields__}
    for key in mapping:
        if key not in known:
            raise ConfigError("unknown field", field=f"{prefix}.{key}")
    try:
        return cls(**mapping)
    except TypeError as exc:  # pragma: no cover - guarded by the loop above
        raise ConfigError(str(exc), field=prefix)


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build and validate a configuration from a plain mapping."""
    if not isinstance(mapping, dict):
        raise ConfigError("configuration must be a mapping", field="<root>")
    mapping = dict(mapping)
    kwargs: dict[str, Any] = {}
    for name, cls in _SECTIONS.items():
        section = mapping.pop(name, {})
        if section is None:
            section = {}
        if not isinstance(section, dict):
            raise ConfigError("expected a mapping", field=name)
        kwargs[name] = _build_section(cls, section, name)
    top_known = {"method", "seed", "output_dir", "name", "noise_snr_db"}
    for key in mapping:
        if key not in top_known:
            raise ConfigError("unknown field", field=key)
    kwargs.update(mapping)
    cfg = ExperimentConfig(**kwargs)
    validate_config(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        mapping = yaml.safe_load(fh)
    return config_from_mapping(mapping or {})


def _require(condition: bool, message: str, field_name: str) -> None:
    if not condition:
        raise ConfigError(message, field=field_name)


def validate_config(cfg: ExperimentConfig) -> None:
    _require(cfg.method in METHODS, f"must be one of {METHODS}", "method")
    _require(isinstance(cfg.seed, int), "must be an integer", "seed")
    _require(
        cfg.noise_snr_db is None or np_isfinite_or_inf(cfg.noise_snr_db),
        "must be a number or null",
        "noise_snr_db",
    )

    d = cfg.data
    _require(d.source in ("phantom", "image"), "must be 'phantom' or 'image'", "data.source")
    _require(d.size >= 16, "must be >= 16", "data.size")
    if d.source == "image":
        _require(bool(d.path), "image source needs a file path", "data.path")

    g = cfg.geometry
    _require(g.n_views >= 1, "must be >= 1", "geometry.n_views")
    _require(
        g.n_detectors is None or g.n_detectors >= 1, "must be >= 1", "geometry.n_detectors"
    )
    _require(g.detector_spacing > 0, "must be positive", "geometry.detector_spacing")

    s = cfg.solver
    _require(s.max_iters >= 1, "must be >= 1", "solver.max_iters")
    _require(0 < s.relaxation < 2, "must be in (0, 2)", "solver.relaxation")
    _require(s.epsilon_guard > 0, "must be positive", "solver.epsilon_guard")

    gp = cfg.gop
    _require(gp.tv_lambda >= 0, "must be >= 0", "gop.tv_lambda")
    _require(
        gp.tv_variant in ("isotropic-exact", "isotropic-squared", "anisotropic"),
        "unknown TV variant",
        "gop.tv_variant",
    )
    _require(gp.step_size > 0, "must be positive", "gop.step_size")
    _require(gp.max_iters >= 1, "must be >= 1", "gop.max_iters")

    i = cfg.inr
    _require(
        i.activation in ("relu", "silu", "sine", "softplus", "tanh"),
        "unknown activation",
        "inr.activation",
    )
    _require(i.depth >= 1, "must be >= 1", "inr.depth")
    _require(i.width >= 1, "must be >= 1", "inr.width")
    _require(0 <= i.dropout_p < 1, "must be in [0, 1)", "inr.dropout_p")
    _require(i.embedding in ("rff", "positional", "none"), "unknown embedding", "inr.embedding")
    _require(i.embedding_m is None or i.embedding_m >= 1, "must be >= 1", "inr.embedding_m")
    _require(i.optimizer in ("adam", "adamw"), "unknown optimizer", "inr.optimizer")
    _require(i.lr > 0, "must be positive", "inr.lr")
    _require(i.epochs >= 0, "must be >= 0", "inr.epochs")
    _require(i.tv_lambda >= 0, "must be >= 0", "inr.tv_lambda")
    _require(
        i.tv_variant in ("isotropic-exact", "isotropic-squared", "anisotropic"),
        "unknown TV variant",
        "inr.tv_variant",
    )
    _require(i.temperature > 0, "must be positive", "inr.temperature")
    _require(i.precision in ("float64", "float32"), "unknown precision", "inr.precision")
    if cfg.method in ("mcd-uinr", "de-mcd-uinr"):
        _require(i.dropout_p > 0, "inference-time dropout needs dropout_p > 0", "inr.dropout_p")

    u = cfg.uq
    _require(u.n_samples >= 2, "must be >= 2", "uq.n_samples")
    _require(u.ensemble_size >= 1, "must be >= 1", "uq.ensemble_size")
    _require(u.workers >= 1, "must be >= 1", "uq.workers")
    if cfg.method in ("de-uinr", "de-mcd-uinr"):
        _require(
            u.n_samples >= u.ensemble_size,
            "need at least one draw per ensemble member",
            "uq.n_samples",
        )

    b = cfg.bbb
    _require(b.prior_sigma > 0, "must be positive", "bbb.prior_sigma")
    _require(b.kl_factor >= 0, "must be >= 0", "bbb.kl_factor")

    h = cfg.hmc
    _require(h.n_samples >= 1, "must be >= 1", "hmc.n_samples")
    _require(0 <= h.burn_in < h.n_samples, "must be in [0, n_samples)", "hmc.burn_in")
    _require(h.thinning >= 1, "must be >= 1", "hmc.thinning")
    _require(h.step_size > 0, "must be positive", "hmc.step_size")
    _require(h.leapfrog_steps >= 1, "must be >= 1", "hmc.leapfrog_steps")
    _require(h.temperature > 0, "must be positive", "hmc.temperature")
    _require(h.init in ("map-checkpoint", "prior-draw"), "unknown init policy", "hmc.init")
    _require(h.gamma > 0, "must be positive", "hmc.gamma")

    m = cfg.metrics
    _require(m.var_floor > 0, "must be positive", "metrics.var_floor")
    _require(m.coverage_points >= 1, "must be >= 1", "metrics.coverage_points")
    _require(m.delta_candidates >= 1, "must be >= 1", "metrics.delta_candidates")


def np_isfinite_or_inf(x) -> bool:
    try:
        float(x)
    except (TypeError, ValueError):
        return False
    return True


def config_hash(cfg: ExperimentConfig) -> str:
    blob = json.dumps(cfg.canonical(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def child_seed(master_seed: int, *parts) -> int:
    """Deterministic, platform-independent seed derived from a label tuple."""
    blob = json.dumps([master_seed, *[str(p) for p in parts]]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


def example_config() -> dict:
    """A complete configuration mapping with default values (for docs/tests)."""
    return ExperimentConfig().canonical()
