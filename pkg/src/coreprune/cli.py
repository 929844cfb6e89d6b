"""Command-line harness.

Subcommands: prune, coverage, flops, sweep, synth.  Exit codes follow a
scripting contract: 0 success, 2 usage error, 3 input format error,
4 internal invariant violation.  Commands that write an output file also
write a ``<name>.manifest.json`` sidecar recording the tool version,
configuration hash, and seeds needed to reproduce the bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from ._version import __version__
from .core import ConfigError, CorepruneError, DEFAULT_EPSILON, GridFormatError, PruneConfig
from .flops import (
    KEEP_PRESETS,
    PRESETS,
    REFERENCE_TFLOPS,
    ModelDims,
    flops_total,
    get_preset,
    reduction_factor,
)
from .gridio import load_grid, write_grid, write_selection
from .metrics import compute_report
from .selectors import SELECTORS, select
from .sweep import SweepSpec, run_sweep, threads_from_env, write_results
from .synth import KINDS, SynthSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4

COMPARISON_NOTE = (
    "note: totals are the explicit six-component sum; the published "
    "reference TFLOP figures do not state which components they include, "
    "so absolute values differ (compare orderings and reduction factors)."
)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--eps", type=float, default=DEFAULT_EPSILON,
                        help="stability constant added to the feature variance")
    parser.add_argument("--format", choices=("csv", "json"), default="json",
                        help="output encoding for tabular results")
    parser.add_argument("--out", type=Path, default=None,
                        help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coreprune", description=__doc__)
    parser.add_argument("--version", action="version", version=f"coreprune {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="select tokens from a grid file")
    p.add_argument("grid", type=Path, help="grid header (.json) or fixture (.csv)")
    p.add_argument("--method", required=True, help=f"one of {sorted(SELECTORS)}")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None, help="exact k, bypassing floor(ratio*M)")
    _common_flags(p)

    p = sub.add_parser("coverage", help="coverage radii for a grid + selection")
    p.add_argument("grid", type=Path)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--selection", type=Path, help="selection JSON produced by prune")
    group.add_argument("--method", help="compute a fresh selection instead")
    p.add_argument("--ratio", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps-ball", type=float, action="append", default=[],
                   help="epsilon-ball radius (repeatable)")
    p.add_argument("--raw", action="store_true",
                   help="measure the feature radius on raw embeddings")
    _common_flags(p)

    p = sub.add_parser("flops", help="pipeline FLOPs table")
    p.add_argument("--preset", default="all",
                   help=f"workload preset or 'all'; known: {', '.join(PRESETS)}")
    p.add_argument("--keep", default="all",
                   help="retained tokens per frame (int), a percent preset "
                        f"{sorted(KEEP_PRESETS)}%% written like '20%%', or 'all'")
    p.add_argument("--frame-accounting", action="store_true",
                   help="charge per-frame components once per frame")
    p.add_argument("--compare", action="store_true",
                   help="emit the side-by-side table against published reference TFLOPs")
    _common_flags(p)

    p = sub.add_parser("sweep", help="methods x ratios x seeds coverage sweep")
    p.add_argument("spec", type=Path, help="sweep spec JSON")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--no-plots", action="store_true")
    p.add_argument("--eps", type=float, default=None,
                   help="override the spec's stability constant")

    p = sub.add_parser("synth", help="write a synthetic grid fixture")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--f", type=int, default=1)
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--n-clusters", type=int, default=4)
    p.add_argument("--cluster-std", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="grid header path (.json)")
    return parser


def _emit(text: str, out: Path | None, manifest: dict | None = None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    if manifest is not None:
        sidecar = out.with_suffix(out.suffix + ".manifest.json")
        sidecar.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _manifest(args_dict: dict) -> dict:
    canonical = json.dumps(args_dict, sort_keys=True, separators=(",", ":"), default=str)
    return {
        "tool": "coreprune",
        "version": __version__,
        "config_hash": hashlib.sha256(canonical.encode()).hexdigest(),
        "config": args_dict,
    }


def _table(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, sort_keys=True, indent=2) + "\n"
    if not rows:
        return "\n"
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(row[c]) for c in header))
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def cmd_prune(args) -> int:
    grid = load_grid(args.grid)
    cfg = PruneConfig(ratio=args.ratio, epsilon=args.eps, seed=args.seed, k_override=args.k)
    sel = select(grid, args.method, cfg)
    manifest = _manifest(
        {"command": "prune", "grid": str(args.grid), "method": args.method,
         "ratio": args.ratio, "seed": args.seed, "k": args.k, "eps": args.eps}
    )
    if args.out is None:
        sys.stdout.write(json.dumps(sel.to_dict(), sort_keys=True) + "\n")
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        write_selection(sel, args.out)
        sidecar = args.out.with_suffix(args.out.suffix + ".manifest.json")
        sidecar.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def cmd_coverage(args) -> int:
    grid = load_grid(args.grid)
    if args.selection is not None:
        from .gridio import read_selection

        sel = read_selection(args.selection)
    else:
        cfg = PruneConfig(ratio=args.ratio, epsilon=args.eps, seed=args.seed, k_override=args.k)
        sel = select(grid, args.method, cfg)
    report = compute_report(grid, sel, args.eps_ball, args.eps, raw=args.raw)
    manifest = _manifest(
        {"command": "coverage", "grid": str(args.grid),
         "selection": str(args.selection) if args.selection else None,
         "method": getattr(sel, "method", None), "ratio": args.ratio,
         "seed": args.seed, "eps": args.eps, "eps_ball": list(args.eps_ball),
         "raw": args.raw}
    )
    if args.format == "csv":
        text = ",".join(report.csv_header()) + "\n" + ",".join(report.csv_row()) + "\n"
    else:
        text = json.dumps(report.to_dict(), sort_keys=True) + "\n"
    _emit(text, args.out, manifest)
    return EXIT_OK


def _keep_values(keep: str) -> list[int]:
    if keep == "all":
        return sorted(KEEP_PRESETS.values())
    if keep.endswith("%"):
        pct = int(keep[:-1])
        if pct not in KEEP_PRESETS:
            raise ConfigError(f"unknown percent preset {keep!r}; known: {sorted(KEEP_PRESETS)}")
        return [KEEP_PRESETS[pct]]
    try:
        return [int(keep)]
    except ValueError:
        raise ConfigError(f"--keep must be an int, 'all', or a percent preset, got {keep!r}") from None


def cmd_flops(args) -> int:
    dims = ModelDims()
    preset_names = list(PRESETS) if args.preset == "all" else [args.preset]
    rows = []
    for name in preset_names:
        preset = get_preset(name)
        for keep in _keep_values(args.keep):
            br = flops_total(preset, dims, keep, args.frame_accounting)
            row = {"preset": name, "keep": keep}
            row.update(br.to_dict())
            row["reduction_factor"] = reduction_factor(preset, dims, keep, args.frame_accounting)
            if args.compare:
                ref = REFERENCE_TFLOPS.get(name, {}).get(keep)
                ref_full = REFERENCE_TFLOPS.get(name, {}).get(preset.V)
                row["reference_tflops"] = ref if ref is not None else ""
                row["reference_factor"] = (
                    ref_full / ref if ref is not None and ref_full is not None else ""
                )
            rows.append(row)
    text = _table(rows, args.format)
    if args.compare:
        sys.stderr.write(COMPARISON_NOTE + "\n")
    manifest = _manifest(
        {"command": "flops", "preset": args.preset, "keep": args.keep,
         "frame_accounting": args.frame_accounting, "compare": args.compare}
    )
    _emit(text, args.out, manifest)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        data = json.loads(args.spec.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise GridFormatError(f"cannot read sweep spec {args.spec}: {exc}") from exc
    if args.eps is not None:
        data["epsilon"] = args.eps
    spec = SweepSpec.from_dict(data)
    result = run_sweep(spec, threads_from_env())
    write_results(result, args.out_dir, plots=not args.no_plots)
    if result.n_failed:
        sys.stderr.write(f"{result.n_failed} of {len(result.rows)} sweep cells failed\n")
        return EXIT_INPUT if _all_failures_are_inputs(result) else EXIT_INTERNAL
    return EXIT_OK


def _all_failures_are_inputs(result) -> bool:
    failed_inputs = {r.input for r in result.rows if r.error}
    succeeded_inputs = {r.input for r in result.rows if not r.error}
    return bool(failed_inputs) and failed_inputs.isdisjoint(succeeded_inputs)


def cmd_synth(args) -> int:
    spec = SynthSpec(
        kind=args.kind, w=args.w, h=args.h, f=args.f, d=args.d,
        n_clusters=args.n_clusters, cluster_std=args.cluster_std, seed=args.seed,
    )
    grid = generate(spec)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_grid(grid, args.out)
    sidecar = args.out.with_suffix(args.out.suffix + ".manifest.json")
    sidecar.write_text(json.dumps(_manifest({"command": "synth", **spec.to_dict()}),
                                  sort_keys=True, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "prune": cmd_prune,
    "coverage": cmd_coverage,
    "flops": cmd_flops,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except GridFormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except CorepruneError as exc:
        sys.stderr.write(f"internal error: {exc}\n")
        return EXIT_INTERNAL
    except Exception as exc:  # invariant violation: report, don't traceback
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
