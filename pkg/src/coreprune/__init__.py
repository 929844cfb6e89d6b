"""coreprune: coverage-driven visual-token pruning and its cost model."""

from ._version import __version__
from .core import (
    DEFAULT_EPSILON,
    AugmentedTokens,
    ConfigError,
    CorepruneError,
    GridFormatError,
    OracleLimitError,
    PruneConfig,
    TokenGrid,
    augment,
    normalize_features,
    total_variance,
)
from .flops import (
    KEEP_PRESETS,
    PRESETS,
    FlopsBreakdown,
    ModelDims,
    WorkloadPreset,
    flops_lm,
    flops_mask,
    flops_prune,
    flops_temporal,
    flops_total,
    flops_vision,
    flops_vmtf,
    reduction_factor,
    sequence_length,
    tflops_shared_formula,
)
from .metrics import (
    CoverageReport,
    compute_report,
    epsilon_ball_coverage,
    feature_coverage_radius,
    joint_coverage_radius,
    spatial_coverage_radius,
)
from .gridio import (
    load_grid,
    read_grid,
    read_grid_csv,
    read_selection,
    write_grid,
    write_selection,
)
from .selectors import (
    METHODS,
    Selection,
    farthest_first,
    oracle_optimal_radius,
    select,
    select_divmax,
    select_evtp,
    select_kcenter,
    select_random,
)
from .sweep import SweepSpec, run_sweep
from .synth import SynthSpec, generate

__all__ = [
    "AugmentedTokens",
    "ConfigError",
    "CorepruneError",
    "CoverageReport",
    "DEFAULT_EPSILON",
    "FlopsBreakdown",
    "GridFormatError",
    "KEEP_PRESETS",
    "METHODS",
    "ModelDims",
    "OracleLimitError",
    "PRESETS",
    "PruneConfig",
    "Selection",
    "SweepSpec",
    "SynthSpec",
    "TokenGrid",
    "WorkloadPreset",
    "augment",
    "compute_report",
    "epsilon_ball_coverage",
    "farthest_first",
    "feature_coverage_radius",
    "flops_lm",
    "flops_mask",
    "flops_prune",
    "flops_temporal",
    "flops_total",
    "flops_vision",
    "flops_vmtf",
    "generate",
    "joint_coverage_radius",
    "load_grid",
    "normalize_features",
    "oracle_optimal_radius",
    "read_grid",
    "read_grid_csv",
    "read_selection",
    "reduction_factor",
    "run_sweep",
    "select",
    "select_divmax",
    "select_evtp",
    "select_kcenter",
    "select_random",
    "sequence_length",
    "spatial_coverage_radius",
    "tflops_shared_formula",
    "total_variance",
    "write_grid",
    "write_selection",
    "__version__",
]
