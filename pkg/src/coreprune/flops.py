"""Closed-form FLOPs model for a pruning-enabled segmentation MLLM pipeline.

Component formulas count multiply-accumulates for one forward pass of each
module of an InstructSeg-style stack: LM decoder, vision encoder, the
pruning step itself, mask decoder, temporal reasoning, and vision-guided
text fusion.  Nonlinearities, biases, and normalization layers are omitted.

Default accounting for video (F > 1): the LM consumes all frames' retained
tokens (sequence grows by v_prime * F) while the per-frame components are
charged once at their per-frame token count; ``frame_accounting=True``
charges vision / pruning / mask / fusion once per frame instead.  The
temporal module is only active for multi-frame inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .core import ConfigError


@dataclass(frozen=True)
class ModelDims:
    """Pipeline hyperparameters; defaults match the published InstructSeg
    configuration (Phi-2 LM, SigLIP-384 vision tower, Mask2Former decoder)."""

    d: int = 2560            # LM hidden size
    d_int: int = 10240       # LM FFN size
    L: int = 32              # LM layers
    vocab: int = 51200       # vocabulary size
    d_v: int = 1152          # vision hidden size
    N_patches: int = 729     # vision patches per frame
    L_v: int = 27            # vision layers
    Q: int = 100             # mask-decoder queries
    d_m: int = 256           # mask-decoder hidden size
    L_d: int = 9             # mask-decoder layers
    Q_t: int = 128           # temporal queries
    L_t: int = 3             # temporal layers
    d_f: int = 1024          # fusion hidden size
    L_f: int = 3             # fusion layers
    T_fixed: int = 100       # fixed auxiliary tokens (prompts, [MASK], [CLS])

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ConfigError(f"{f.name} must be non-negative")


@dataclass(frozen=True)
class WorkloadPreset:
    """Token configuration of one benchmark input."""

    name: str
    T_text: int
    V: int
    F: int


PRESETS: dict[str, WorkloadPreset] = {
    p.name: p
    for p in (
        WorkloadPreset("RefCOCO", 15, 729, 1),
        WorkloadPreset("RefCOCO+", 15, 729, 1),
        WorkloadPreset("RefCOCOg", 23, 729, 1),
        WorkloadPreset("MM-Conv", 50, 729, 1),
        WorkloadPreset("ReasonSeg", 80, 729, 1),
        WorkloadPreset("RefYouTube", 20, 729, 4),
        WorkloadPreset("RefDAVIS", 18, 729, 4),
        WorkloadPreset("ReVOS", 25, 729, 4),
    )
}

# Retained-token presets: 100%, 20%, 10%, 5% of 729 with published rounding.
KEEP_PRESETS: dict[int, int] = {100: 729, 20: 146, 10: 73, 5: 36}

# Published end-to-end TFLOP figures for the same pipeline, used only for the
# side-by-side comparison table.  Our component sum does not reproduce them
# exactly (which modules the published totals include is ambiguous); the
# comparison checks orderings and reduction factors, not absolute values.
REFERENCE_TFLOPS: dict[str, dict[int, float]] = {
    "RefCOCO": {729: 2.376, 146: 0.724, 73: 0.525, 36: 0.447},
    "ReVOS": {729: 9.609, 146: 1.989, 73: 1.161, 36: 0.751},
}


@dataclass(frozen=True)
class FlopsBreakdown:
    """Per-component FLOPs and their sum for one configuration."""

    lm: float
    vision: float
    prune: float
    mask: float
    temporal: float
    vmtf: float
    total: float
    tflops: float

    def to_dict(self) -> dict:
        return {
            "lm": self.lm,
            "vision": self.vision,
            "prune": self.prune,
            "mask": self.mask,
            "temporal": self.temporal,
            "vmtf": self.vmtf,
            "total": self.total,
            "tflops": self.tflops,
        }


def get_preset(name: str) -> WorkloadPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; known presets: {', '.join(PRESETS)}"
        ) from None


def sequence_length(preset: WorkloadPreset, dims: ModelDims, v_prime: int) -> int:
    """LM sequence length S = T_text + T_fixed + v_prime.

    ``v_prime`` is the total retained visual token count entering the LM;
    for video the caller passes per-frame retention times F.
    """
    if v_prime <= 0:
        raise ConfigError(f"v_prime must be positive, got {v_prime}")
    if v_prime > preset.V * preset.F:
        raise ConfigError(
            f"v_prime={v_prime} exceeds available tokens {preset.V * preset.F}"
        )
    return preset.T_text + dims.T_fixed + v_prime


def flops_lm(S: int, dims: ModelDims) -> float:
    """LM decoder: L * (4Sd^2 + 2S^2d + 2S*d*d_int) + S*d*vocab."""
    d = dims.d
    return dims.L * (4 * S * d**2 + 2 * S**2 * d + 2 * S * d * dims.d_int) + S * d * dims.vocab


def flops_vision(dims: ModelDims) -> float:
    """Vision encoder: L_v * (6N*d_v^2 + 2N^2*d_v) + N*d_v*d (projection)."""
    n, d_v = dims.N_patches, dims.d_v
    return dims.L_v * (6 * n * d_v**2 + 2 * n**2 * d_v) + n * d_v * dims.d


def flops_prune(V: int, v_prime: int, dims: ModelDims) -> float:
    """Token pruning: 2Vd + V*V'*d/10 + V'd."""
    d = dims.d
    return 2 * V * d + V * v_prime * d / 10 + v_prime * d


def flops_mask(v_prime: int, dims: ModelDims) -> float:
    """Mask decoder: L_d * (12Q*d_m^2 + 2Q^2*d_m + 2Q*V'*d_m) + Q*d_m*V'."""
    q, d_m = dims.Q, dims.d_m
    return dims.L_d * (12 * q * d_m**2 + 2 * q**2 * d_m + 2 * q * v_prime * d_m) + q * d_m * v_prime


def flops_temporal(F: int, dims: ModelDims) -> float:
    """Temporal reasoning: L_t * (Q_t*F*d^2 + 4Q_t*d^2)."""
    return dims.L_t * (dims.Q_t * F * dims.d**2 + 4 * dims.Q_t * dims.d**2)


def flops_vmtf(T_eff: int, v_prime: int, dims: ModelDims) -> float:
    """Fusion: L_f * (T_eff*d*d_f + V'*d_v*d_f + 2*T_eff*V'*d_f)."""
    d_f = dims.d_f
    return dims.L_f * (T_eff * dims.d * d_f + v_prime * dims.d_v * d_f + 2 * T_eff * v_prime * d_f)


def flops_total(
    preset: WorkloadPreset | str,
    dims: ModelDims,
    v_prime_per_frame: int,
    frame_accounting: bool = False,
) -> FlopsBreakdown:
    """Compose all six components for one (preset, retention) configuration.

    ``v_prime_per_frame`` is the retained token count per frame.  The fusion
    module's effective text length defaults to T_text + T_fixed.
    """
    if isinstance(preset, str):
        preset = get_preset(preset)
    if v_prime_per_frame <= 0:
        raise ConfigError(f"v_prime must be positive, got {v_prime_per_frame}")
    if v_prime_per_frame > preset.V:
        raise ConfigError(
            f"v_prime={v_prime_per_frame} exceeds per-frame tokens V={preset.V}"
        )
    s = sequence_length(preset, dims, v_prime_per_frame * preset.F)
    per_frame_mult = preset.F if frame_accounting else 1
    t_eff = preset.T_text + dims.T_fixed
    lm = float(flops_lm(s, dims))
    vision = float(flops_vision(dims) * per_frame_mult)
    prune = float(flops_prune(preset.V, v_prime_per_frame, dims) * per_frame_mult)
    mask = float(flops_mask(v_prime_per_frame, dims) * per_frame_mult)
    temporal = float(flops_temporal(preset.F, dims)) if preset.F > 1 else 0.0
    vmtf = float(flops_vmtf(t_eff, v_prime_per_frame, dims) * per_frame_mult)
    total = lm + vision + prune + mask + temporal + vmtf
    return FlopsBreakdown(
        lm=lm,
        vision=vision,
        prune=prune,
        mask=mask,
        temporal=temporal,
        vmtf=vmtf,
        total=total,
        tflops=total * 1e-12,
    )


def reduction_factor(
    preset: WorkloadPreset | str,
    dims: ModelDims,
    v_prime_per_frame: int,
    frame_accounting: bool = False,
) -> float:
    """Unpruned total divided by the total at the given retention (1.0 at V'=V)."""
    if isinstance(preset, str):
        preset = get_preset(preset)
    full = flops_total(preset, dims, preset.V, frame_accounting)
    kept = flops_total(preset, dims, v_prime_per_frame, frame_accounting)
    return full.total / kept.total


def tflops_shared_formula(S_shared: float, N: int, d: int, D: int, mu: int) -> float:
    """Single-expression TFLOPs estimate: a shared-component FLOPs constant
    plus a per-layer polynomial in the fused sequence length mu.

    Provided as a convenience alongside the component sum; the two are not
    interchangeable (this form folds every non-LM module into ``S_shared``).
    """
    return (S_shared + N * (4 * mu * d**2 - 2 * mu**2 * d + 2 * mu * d * D)) / 1e12
