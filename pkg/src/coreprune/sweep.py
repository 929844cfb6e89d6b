"""Sweep harness: selectors x ratios x seeds x inputs -> coverage table.

One cell per (input, method, ratio, seed).  Cells are independent and may
run on a thread pool (capped by the COREPRUNE_THREADS environment
variable); the result table is always emitted in spec order, and a failed
cell is recorded in its row's error column instead of aborting the sweep.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ._version import __version__
from .core import ConfigError, CorepruneError, DEFAULT_EPSILON, PruneConfig, TokenGrid
from .gridio import load_grid
from .metrics import CoverageReport, compute_report
from .selectors import SELECTORS, select
from .synth import SynthSpec, generate

THREADS_ENV_VAR = "COREPRUNE_THREADS"

InputSpec = Union[str, SynthSpec]


def threads_from_env(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian sweep description.

    ``inputs`` mixes grid file paths with inline synthetic-grid specs; every
    referenced file must exist before any cell runs.
    """

    methods: tuple[str, ...]
    ratios: tuple[float, ...]
    seeds: tuple[int, ...]
    inputs: tuple[InputSpec, ...]
    epsilons: tuple[float, ...] = ()
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not self.methods or not self.ratios or not self.seeds or not self.inputs:
            raise ConfigError("sweep spec requires non-empty methods, ratios, seeds, inputs")
        unknown = [m for m in self.methods if m not in SELECTORS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; expected subset of {sorted(SELECTORS)}")
        for r in self.ratios:
            if not (0.0 < r <= 1.0):
                raise ConfigError(f"ratio must lie in (0, 1], got {r}")
        for path in self.inputs:
            if isinstance(path, str) and not Path(path).exists():
                raise ConfigError(f"sweep input file does not exist: {path}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        try:
            inputs = []
            for item in data["inputs"]:
                inputs.append(SynthSpec.from_dict(item) if isinstance(item, dict) else str(item))
            return cls(
                methods=tuple(data["methods"]),
                ratios=tuple(float(r) for r in data["ratios"]),
                seeds=tuple(int(s) for s in data["seeds"]),
                inputs=tuple(inputs),
                epsilons=tuple(float(e) for e in data.get("epsilons", ())),
                epsilon=float(data.get("epsilon", DEFAULT_EPSILON)),
            )
        except KeyError as exc:
            raise ConfigError(f"sweep spec missing field {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "methods": list(self.methods),
            "ratios": list(self.ratios),
            "seeds": list(self.seeds),
            "inputs": [
                i.to_dict() if isinstance(i, SynthSpec) else i for i in self.inputs
            ],
            "epsilons": list(self.epsilons),
            "epsilon": self.epsilon,
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def input_label(item: InputSpec) -> str:
    if isinstance(item, SynthSpec):
        parts = ",".join(f"{k}={v}" for k, v in sorted(item.to_dict().items()))
        return f"synth[{parts}]"
    return str(item)


@dataclass(frozen=True)
class SweepRow:
    input: str
    method: str
    ratio: float
    seed: int
    report: Optional[CoverageReport]
    error: str = ""


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.rows if r.error)

    def csv_lines(self) -> list[list[str]]:
        ball_eps = sorted(self.spec.epsilons)
        header = ["input", "method", "ratio", "seed", "R_f", "R_j", "R_s"]
        header += [f"eps_{e!r}" for e in ball_eps]
        header += ["error"]
        lines = [header]
        for row in self.rows:
            cells = [row.input, row.method, repr(row.ratio), str(row.seed)]
            if row.report is None:
                cells += [""] * (3 + len(ball_eps))
            else:
                rep = row.report
                cells += [repr(rep.feature_radius), repr(rep.joint_radius), repr(rep.spatial_radius)]
                cells += [repr(frac) for _, frac in rep.epsilon_ball_fractions]
            cells.append(row.error)
            lines.append(cells)
        return lines

    def summary(self) -> dict:
        """Per-method means and their per-ratio ordering by feature radius."""
        per_method: dict[str, dict[str, list[float]]] = {}
        per_method_ratio: dict[str, dict[str, list[float]]] = {}
        for row in self.rows:
            if row.report is None:
                continue
            bucket = per_method.setdefault(row.method, {"R_f": [], "R_j": [], "R_s": []})
            bucket["R_f"].append(row.report.feature_radius)
            bucket["R_j"].append(row.report.joint_radius)
            bucket["R_s"].append(row.report.spatial_radius)
            key = repr(row.ratio)
            per_method_ratio.setdefault(row.method, {}).setdefault(key, []).append(
                row.report.feature_radius
            )
        means = {
            method: {name: float(np.mean(vals)) for name, vals in buckets.items()}
            for method, buckets in per_method.items()
        }
        ratio_means = {
            method: {rk: float(np.mean(v)) for rk, v in ratios.items()}
            for method, ratios in per_method_ratio.items()
        }
        ordering = {}
        for ratio in self.spec.ratios:
            key = repr(ratio)
            scored = [
                (ratio_means[m][key], m)
                for m in self.spec.methods
                if m in ratio_means and key in ratio_means[m]
            ]
            ordering[key] = [m for _, m in sorted(scored)]
        return {
            "per_method_means": means,
            "mean_R_f_by_ratio": ratio_means,
            "methods_by_mean_R_f": ordering,
            "n_rows": len(self.rows),
            "n_failed": self.n_failed,
        }


def _load_input(item: InputSpec) -> TokenGrid:
    if isinstance(item, SynthSpec):
        return generate(item)
    return load_grid(item)


def run_sweep(spec: SweepSpec, threads: Optional[int] = None) -> SweepResult:
    """Evaluate every sweep cell; row order follows the spec's nesting
    (input, then method, then ratio, then seed) regardless of threading."""
    if threads is None:
        threads = threads_from_env()
    grids: list[tuple[str, Optional[TokenGrid], str]] = []
    for item in spec.inputs:
        label = input_label(item)
        try:
            grids.append((label, _load_input(item), ""))
        except (CorepruneError, ValueError, OSError) as exc:
            grids.append((label, None, str(exc)))

    cells = []
    for label, grid, load_error in grids:
        for method in spec.methods:
            for ratio in spec.ratios:
                for seed in spec.seeds:
                    cells.append((label, grid, load_error, method, ratio, seed))

    ball_eps = tuple(sorted(spec.epsilons))

    def evaluate(cell) -> SweepRow:
        label, grid, load_error, method, ratio, seed = cell
        if grid is None:
            return SweepRow(label, method, ratio, seed, None, load_error)
        try:
            cfg = PruneConfig(ratio=ratio, epsilon=spec.epsilon, seed=seed)
            sel = select(grid, method, cfg)
            report = compute_report(grid, sel, ball_eps, spec.epsilon)
            return SweepRow(label, method, ratio, seed, report)
        except (CorepruneError, ValueError) as exc:
            return SweepRow(label, method, ratio, seed, None, str(exc))

    if threads <= 1 or len(cells) <= 1:
        rows = [evaluate(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate, cells))
    return SweepResult(spec=spec, rows=tuple(rows))


def write_results(
    result: SweepResult,
    out_dir: str | Path,
    plots: bool = True,
) -> dict[str, Path]:
    """Write results.csv, summary.json, manifest.json, and figures.

    The manifest carries exactly what reproduces the output bytes: tool
    version, the full sweep spec, and its hash.  Thread count is omitted on
    purpose; results are thread-count invariant by construction.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    csv_path = out_dir / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(result.csv_lines())
    paths["csv"] = csv_path

    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(result.summary(), sort_keys=True, indent=2) + "\n")
    paths["summary"] = summary_path

    manifest = {
        "tool": "coreprune",
        "version": __version__,
        "config_hash": result.spec.config_hash(),
        "spec": result.spec.to_dict(),
        "seeds": list(result.spec.seeds),
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    paths["manifest"] = manifest_path

    if plots:
        from .plots import render_sweep_figures

        paths.update(render_sweep_figures(result, out_dir / "figures"))
    return paths
