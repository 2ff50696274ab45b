"""Desk-scale grid sweeps over experiment parameters.

The grid is a mapping from dotted config paths to value lists; children are
the Cartesian product, each with a seed derived from the master seed and its
parameter assignment (so the sweep order never matters).  Failed children are
recorded and the sweep continues.  The aggregate CSV lists one row per
successful child, ranked by reconstruction quality.
"""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from .config import ExperimentConfig, child_seed, config_from_mapping, config_hash
from .run import RunManifest, run_experiment

__all__ = ["SweepResult", "run_sweep"]


@dataclass
class SweepResult:
    manifests: list[RunManifest]
    failures: list[dict] = field(default_factory=list)
    csv_path: str | None = None


def _set_dotted(mapping: dict, path: str, value) -> None:
    keys = path.split(".")
    node = mapping
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError("cannot override a scalar with a mapping", field=path)
    node[keys[-1]] = value


def _child_name(assignment: dict) -> str:
    parts = [f"{path.split('.')[-1]}={value}" for path, value in sorted(assignment.items())]
    return "_".join(parts).replace("/", "-") or "base"


def _child_config(base_mapping: dict, assignment: dict, out_root: Path, master_seed: int):
    mapping = json.loads(json.dumps(base_mapping))  # deep copy
    for path, value in assignment.items():
        _set_dotted(mapping, path, value)
    mapping["seed"] = child_seed(master_seed, *sorted(assignment.items()))
    mapping["output_dir"] = str(out_root / _child_name(assignment))
    mapping["name"] = _child_name(assignment)
    return config_from_mapping(mapping)


def _run_child(cfg: ExperimentConfig):
    return run_experiment(cfg)


def run_sweep(
    base: ExperimentConfig | dict,
    grid: dict[str, list],
    workers: int = 1,
) -> SweepResult:
    """Run the Cartesian product of ``grid`` over a base configuration.

    Returns every successful manifest plus a record of failures, and writes
    ``sweep_results.csv`` (rank, swept parameters, and the headline metrics,
    sorted by descending reconstruction quality) under the base output
    directory.
    """
    if not grid:
        raise ConfigError("sweep grid must name at least one parameter", field="<grid>")
    for path, values in grid.items():
        if not isinstance(values, (list, tuple)) or len(values) == 0:
            raise ConfigError("grid values must be a nonempty list", field=path)

    if isinstance(base, ExperimentConfig):
        base_mapping = base.canonical()
    else:
        base_mapping = json.loads(json.dumps(base))
        config_from_mapping(base_mapping)  # validate early

    out_root = Path(base_mapping.get("output_dir", "runs/sweep"))
    out_root.mkdir(parents=True, exist_ok=True)
    master_seed = int(base_mapping.get("seed", 0))

    paths = sorted(grid)
    combos = [dict(zip(paths, values)) for values in itertools.product(*(grid[p] for p in paths))]
    children = []
    failures = []
    for assignment in combos:
        try:
            children.append((assignment, _child_config(base_mapping, assignment, out_root, master_seed)))
        except ConfigError as exc:
            failures.append({"assignment": assignment, "error": str(exc), "config_hash": None})

    manifests: list[RunManifest] = []
    rows = []
    if workers > 1 and len(children) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(a, cfg, pool.submit(_run_child, cfg)) for a, cfg in children]
            for assignment, cfg, future in futures:
                try:
                    manifest = future.result()
                    manifests.append(manifest)
                    rows.append((assignment, manifest))
                except Exception as exc:  # noqa: BLE001 - sweep must survive child failures
                    failures.append(
                        {
                            "assignment": assignment,
                            "error": str(exc),
                            "config_hash": config_hash(cfg),
                        }
                    )
    else:
        for assignment, cfg in children:
            try:
                manifest = _run_child(cfg)
                manifests.append(manifest)
                rows.append((assignment, manifest))
            except Exception as exc:  # noqa: BLE001
                failures.append(
                    {
                        "assignment": assignment,
                        "error": str(exc),
                        "config_hash": config_hash(cfg),
                    }
                )

    rows.sort(key=lambda item: item[1].metrics.get("psnr", float("-inf")), reverse=True)
    csv_path = out_root / "sweep_results.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["rank", *paths, "psnr", "snr", "nll", "ece"]
        writer.writerow(header)
        for rank, (assignment, manifest) in enumerate(rows, start=1):
            writer.writerow(
                [
                    rank,
                    *[assignment[p] for p in paths],
                    manifest.metrics.get("psnr"),
                    manifest.metrics.get("snr"),
                    manifest.metrics.get("nll"),
                    manifest.metrics.get("ece"),
                ]
            )
    if failures:
        (out_root / "sweep_failures.json").write_text(
            json.dumps(failures, indent=2, sort_keys=True, default=str) + "\n"
        )
    return SweepResult(manifests=manifests, failures=failures, csv_path=str(csv_path))
