"""Command-line entry point.

Verbs::

    tomouq run <config.yaml>            one experiment
    tomouq sweep <config.yaml> <grid.yaml>   grid sweep
    tomouq metrics <mean> <var> <truth>      metrics from image files
    tomouq phantom <spec.yaml> <out>         render a phantom image

Exit codes: 0 success, 2 configuration/validation failure, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import yaml

from ..errors import ConfigError, FormatError, TomouqError
from ..image_io import load_pgm, load_png, load_raw_image, save_pgm, save_png_preview, save_raw_image
from ..metrics import mse, nll, psnr, snr
from ..phantom import Ellipse, PhantomSpec, generate_shepp_logan, shepp_logan_spec
from .config import config_from_mapping, load_config
from .run import run_experiment
from .sweep import run_sweep

__all__ = ["main"]

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomouq",
        description="Tomographic reconstruction and uncertainty experiments",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="execute one configured experiment")
    run_p.add_argument("config", help="YAML experiment configuration")
    _common_overrides(run_p)

    sweep_p = sub.add_parser("sweep", help="run a parameter grid over a base config")
    sweep_p.add_argument("config", help="YAML base configuration")
    sweep_p.add_argument("grid", help="YAML mapping of dotted config paths to value lists")
    _common_overrides(sweep_p)

    met_p = sub.add_parser("metrics", help="compute metrics from exported images")
    met_p.add_argument("mean", help="reconstructed mean image (.pgm/.png/.f64)")
    met_p.add_argument("var", help="predictive variance image, or '-' if none")
    met_p.add_argument("truth", help="ground-truth image")
    met_p.add_argument("--shape", type=int, nargs=2, metavar=("H", "W"),
                       help="image shape, required for raw .f64 inputs")

    ph_p = sub.add_parser("phantom", help="render a phantom spec to an image file")
    ph_p.add_argument("spec", help="YAML phantom spec (size, variant_seed, ellipses)")
    ph_p.add_argument("out", help="output image (.pgm/.png/.f64)")
    return parser


def _common_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--out-dir", default=None, help="override the output directory")
    p.add_argument("--threads", type=int, default=None, help="worker processes")


def _load_mapping(path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("expected a YAML mapping", field=str(path))
    return data


def _apply_overrides(mapping: dict, args) -> dict:
    if args.seed is not None:
        mapping["seed"] = args.seed
    if args.out_dir is not None:
        mapping["output_dir"] = args.out_dir
    if args.threads is not None:
        mapping.setdefault("uq", {})
        if not isinstance(mapping["uq"], dict):
            raise ConfigError("expected a mapping", field="uq")
        mapping["uq"]["workers"] = args.threads
    return mapping


def _load_image_arg(path, shape):
    if path.endswith(".f64"):
        if shape is None:
            raise ConfigError("raw .f64 inputs need --shape H W", field="--shape")
        return load_raw_image(path, tuple(shape))
    if path.endswith(".pgm"):
        return load_pgm(path)
    if path.endswith(".png"):
        return load_png(path)
    raise FormatError(f"{path}: unsupported image format")


def _cmd_run(args) -> int:
    mapping = _apply_overrides(_load_mapping(args.config), args)
    cfg = config_from_mapping(mapping)
    manifest = run_experiment(cfg)
    print(json.dumps(manifest.to_dict(), sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    mapping = _apply_overrides(_load_mapping(args.config), args)
    grid = _load_mapping(args.grid)
    workers = args.threads if args.threads else 1
    result = run_sweep(mapping, grid, workers=workers)
    summary = {
        "runs": len(result.manifests),
        "failures": len(result.failures),
        "csv": result.csv_path,
    }
    print(json.dumps(summary, sort_keys=True, indent=2))
    return EXIT_OK if not result.failures else EXIT_RUNTIME


def _cmd_metrics(args) -> int:
    mean = _load_image_arg(args.mean, args.shape)
    truth = _load_image_arg(args.truth, args.shape)
    results = {
        "psnr": psnr(truth, mean),
        "snr": snr(truth, mean),
        "mse": mse(truth, mean),
    }
    if args.var != "-":
        var = _load_image_arg(args.var, args.shape)
        results["nll"] = nll(mean, var, truth)
        results["nll_mean"] = nll(mean, var, truth, reduction="mean")
    print(json.dumps(results, sort_keys=True, indent=2))
    return EXIT_OK


def _phantom_from_mapping(mapping: dict) -> PhantomSpec:
    size = mapping.get("size")
    if size is None:
        raise ConfigError("phantom spec needs a size", field="size")
    variant_seed = mapping.get("variant_seed")
    if "ellipses" in mapping and mapping["ellipses"] is not None:
        ellipses = []
        for i, entry in enumerate(mapping["ellipses"]):
            if len(entry) != 6:
                raise ConfigError(
                    "ellipse needs (cx, cy, a, b, rot_deg, delta)", field=f"ellipses[{i}]"
                )
            ellipses.append(Ellipse(*[float(v) for v in entry]))
        return PhantomSpec(size=int(size), ellipses=tuple(ellipses), variant_seed=variant_seed)
    return shepp_logan_spec(int(size), variant_seed=variant_seed)


def _cmd_phantom(args) -> int:
    spec = _phantom_from_mapping(_load_mapping(args.spec))
    image = generate_shepp_logan(spec)
    out = args.out
    if out.endswith(".pgm"):
        save_pgm(out, image, bit_depth=16)
    elif out.endswith(".png"):
        save_png_preview(out, image)
    elif out.endswith(".f64"):
        save_raw_image(out, image)
    else:
        raise FormatError(f"{out}: unsupported output format")
    print(json.dumps({"out": out, "size": int(image.shape[0])}))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "metrics": _cmd_metrics,
        "phantom": _cmd_phantom,
    }
    try:
        return handlers[args.verb](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except TomouqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
