"""Deterministic synthetic token grids for selector studies.

Four regimes, chosen to exercise the behaviors the selectors distinguish:
``gaussian_clusters`` (distinct feature modes tied to spatial regions),
``constant`` (the fully homogeneous regime where spatial spread must carry
the selection), ``gradient`` (features mirror position smoothly), and
``checker`` (two prototypes alternating by cell parity).

Randomness comes from numpy's default PCG64 generator seeded with the spec
seed, with a pinned draw order (cluster centers first, then per-token
noise), so a spec reproduces the same grid bit-for-bit anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, TokenGrid

KINDS = ("gaussian_clusters", "constant", "gradient", "checker")

CONSTANT_FILL = 1.0


@dataclass(frozen=True)
class SynthSpec:
    kind: str
    w: int
    h: int
    f: int = 1
    d: int = 8
    n_clusters: int = 4
    cluster_std: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown synth kind {self.kind!r}; expected one of {KINDS}")
        if min(self.w, self.h, self.f, self.d) < 1:
            raise ConfigError("w, h, f, d must all be positive")
        if self.kind == "gaussian_clusters":
            if self.n_clusters < 1:
                raise ConfigError("n_clusters must be positive")
            if self.n_clusters > self.w * self.h:
                raise ConfigError(
                    f"n_clusters={self.n_clusters} exceeds cells per frame {self.w * self.h}"
                )
            if self.cluster_std < 0:
                raise ConfigError("cluster_std must be non-negative")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "w": self.w,
            "h": self.h,
            "f": self.f,
            "d": self.d,
            "n_clusters": self.n_clusters,
            "cluster_std": self.cluster_std,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        known = {f: data[f] for f in ("kind", "w", "h") if f in data}
        missing = {"kind", "w", "h"} - set(known)
        if missing:
            raise ConfigError(f"synth spec missing fields: {sorted(missing)}")
        for opt in ("f", "d", "n_clusters", "cluster_std", "seed"):
            if opt in data:
                known[opt] = data[opt]
        return cls(**known)


def cluster_assignment(w: int, h: int, n_clusters: int) -> np.ndarray:
    """Partition the per-frame cells into n contiguous row-major bands.

    Every cluster owns at least one cell for any n <= w*h, including
    degenerate single-row or single-column grids.
    """
    cells = np.arange(w * h)
    return (cells * n_clusters) // (w * h)


def generate(spec: SynthSpec) -> TokenGrid:
    """Materialize the grid described by a spec (identical spec, identical grid)."""
    w, h, f, d = spec.w, spec.h, spec.f, spec.d
    m = f * w * h
    if spec.kind == "constant":
        emb = np.full((m, d), CONSTANT_FILL)
    elif spec.kind == "gradient":
        cells = np.arange(w * h)
        x = (cells % w + 1) / w
        y = (cells // w + 1) / h
        per_frame = np.repeat((x + y)[:, None], d, axis=1)
        emb = np.tile(per_frame, (f, 1))
    elif spec.kind == "checker":
        cells = np.arange(w * h)
        parity = ((cells // w + cells % w) % 2).astype(np.float64)
        emb = np.tile(np.repeat(parity[:, None], d, axis=1), (f, 1))
    else:  # gaussian_clusters
        rng = np.random.default_rng(spec.seed)
        centers = rng.standard_normal((spec.n_clusters, d))
        noise = rng.standard_normal((m, d)) * spec.cluster_std
        assign = np.tile(cluster_assignment(w, h, spec.n_clusters), f)
        emb = centers[assign] + noise
    return TokenGrid(emb, w, h, f)
