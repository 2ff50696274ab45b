"""Parallel-beam CT reconstruction with calibrated uncertainty.

The toolkit covers the full pipeline: phantom generation, an explicit sparse
projection operator, analytic and iterative solvers, a self-contained
coordinate-network engine, posterior sampling (inference-time dropout,
ensembles, variational weights, Hamiltonian Monte Carlo), and accuracy /
calibration metrics, tied together by a config-driven experiment runner.
"""

from . import calibration, gop, image_io, inr, metrics, solvers, tv, uq
from .errors import (
    ConfigError,
    DegenerateInputError,
    FormatError,
    GeometryError,
    NumericError,
    SamplerError,
    ShapeError,
    TomouqError,
    TrainingDivergedError,
)
from .geometry import (
    ProjectionGeometry,
    default_padded_size,
    geometry_for_image,
    normalized_pixel_centers,
    pixel_centers,
)
from .phantom import (
    Ellipse,
    PhantomSpec,
    SHEPP_LOGAN_ELLIPSES,
    generate_shepp_logan,
    shepp_logan_spec,
)
from .radon import RadonOperator, back_project, build_radon_operator, forward_project
from .sinogram import Sinogram, add_noise, load_sinogram, save_sinogram

__version__ = "0.1.0"

__all__ = [
    "ProjectionGeometry",
    "default_padded_size",
    "geometry_for_image",
    "pixel_centers",
    "normalized_pixel_centers",
    "Ellipse",
    "PhantomSpec",
    "SHEPP_LOGAN_ELLIPSES",
    "shepp_logan_spec",
    "generate_shepp_logan",
    "RadonOperator",
    "build_radon_operator",
    "forward_project",
    "back_project",
    "Sinogram",
    "add_noise",
    "save_sinogram",
    "load_sinogram",
    "TomouqError",
    "GeometryError",
    "ShapeError",
    "DegenerateInputError",
    "NumericError",
    "TrainingDivergedError",
    "ConfigError",
    "FormatError",
    "SamplerError",
    "calibration",
    "gop",
    "image_io",
    "inr",
    "metrics",
    "solvers",
    "tv",
    "uq",
]
