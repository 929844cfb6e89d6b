"""Coverage-radius diagnostics for a (grid, selection) pair.

Three radii, one per space the selectors reason in:

* feature radius  -- normalized feature block only
* joint radius    -- feature block plus weighted coordinate block
* spatial radius  -- normalized (x/W, y/H) coordinates only

Each is the max over all tokens of the distance to its nearest selected
token.  Distances are exact Euclidean; no approximate nearest neighbor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial.distance import cdist

from .core import (
    DEFAULT_EPSILON,
    AugmentedTokens,
    ConfigError,
    TokenGrid,
    augment,
    normalize_features,
)

SelectionLike = Union[Sequence[int], "np.ndarray"]


def _selected_indices(sel, num_tokens: int) -> np.ndarray:
    """Accept a Selection or a plain index sequence; validate against M."""
    indices = np.asarray(getattr(sel, "indices", sel), dtype=np.intp)
    if indices.size == 0:
        raise ConfigError("selection is empty; coverage radius is undefined")
    if indices.min() < 0 or indices.max() >= num_tokens:
        raise ConfigError(
            f"selection indices out of range for M={num_tokens}"
        )
    return indices


def nearest_center_distances(points: np.ndarray, center_indices: np.ndarray) -> np.ndarray:
    """Per-point Euclidean distance to the nearest of points[center_indices]."""
    return cdist(points, points[center_indices]).min(axis=1)


def max_min_radius(points: np.ndarray, center_indices) -> float:
    """Coverage radius of a center subset over a point matrix."""
    centers = np.asarray(center_indices, dtype=np.intp)
    if centers.size == 0:
        raise ConfigError("center set is empty; coverage radius is undefined")
    return float(nearest_center_distances(points, centers).max())


def feature_coverage_radius(
    grid: TokenGrid,
    sel,
    epsilon: Optional[float] = None,
    raw: bool = False,
) -> float:
    """Max distance from any token to its nearest selected token, feature space.

    Measured in the same normalized feature space the selectors operate in;
    pass ``raw=True`` to measure on the raw embeddings instead (diagnostic
    only, the selectors never see that space).
    """
    eps = _resolve_epsilon(sel, epsilon)
    indices = _selected_indices(sel, grid.num_tokens)
    points = grid.embeddings if raw else normalize_features(grid, eps).embeddings
    return max_min_radius(points, indices)


def joint_coverage_radius(aug: AugmentedTokens, sel) -> float:
    """Coverage radius in the (D+2)-dimensional augmented space."""
    indices = _selected_indices(sel, aug.num_tokens)
    return max_min_radius(aug.vectors, indices)


def spatial_coverage_radius(grid: TokenGrid, sel) -> float:
    """Coverage radius over normalized (x/W, y/H) coordinates only."""
    indices = _selected_indices(sel, grid.num_tokens)
    return max_min_radius(grid.coordinates(), indices)


def epsilon_ball_coverage(
    grid: TokenGrid,
    sel,
    epsilons: Sequence[float],
    epsilon: Optional[float] = None,
    raw: bool = False,
) -> list[tuple[float, float]]:
    """Fraction of tokens within feature distance eps of a selected token.

    Returns one (eps, fraction) pair per requested radius, in the order
    given.  A token counts as covered when its nearest-center distance is
    <= eps, so eps = 0 covers exactly the selected tokens (plus duplicates).
    """
    for e in epsilons:
        if e < 0:
            raise ConfigError(f"epsilon-ball radius must be non-negative, got {e}")
    eps = _resolve_epsilon(sel, epsilon)
    indices = _selected_indices(sel, grid.num_tokens)
    points = grid.embeddings if raw else normalize_features(grid, eps).embeddings
    dists = nearest_center_distances(points, indices)
    m = grid.num_tokens
    return [(float(e), float(np.count_nonzero(dists <= e) / m)) for e in epsilons]


def _resolve_epsilon(sel, epsilon: Optional[float]) -> float:
    if epsilon is not None:
        return epsilon
    config = getattr(sel, "config", None)
    if config is not None:
        return config.epsilon
    return DEFAULT_EPSILON


@dataclass(frozen=True)
class CoverageReport:
    """All three radii plus epsilon-ball coverage for one selection."""

    feature_radius: float
    joint_radius: float
    spatial_radius: float
    epsilon_ball_fractions: tuple[tuple[float, float], ...]
    method: str = ""
    ratio: float = float("nan")
    seed: int = 0

    def __post_init__(self):
        for name in ("feature_radius", "joint_radius", "spatial_radius"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "ratio": self.ratio,
            "seed": self.seed,
            "R_f": self.feature_radius,
            "R_j": self.joint_radius,
            "R_s": self.spatial_radius,
            "epsilon_balls": [list(pair) for pair in self.epsilon_ball_fractions],
        }

    def csv_header(self) -> list[str]:
        cols = ["method", "ratio", "seed", "R_f", "R_j", "R_s"]
        cols += [f"eps_{e!r}" for e, _ in self.epsilon_ball_fractions]
        return cols

    def csv_row(self) -> list[str]:
        cells = [
            self.method,
            repr(self.ratio),
            str(self.seed),
            repr(self.feature_radius),
            repr(self.joint_radius),
            repr(self.spatial_radius),
        ]
        cells += [repr(frac) for _, frac in self.epsilon_ball_fractions]
        return cells


def compute_report(
    grid: TokenGrid,
    sel,
    epsilons: Sequence[float] = (),
    epsilon: Optional[float] = None,
    raw: bool = False,
) -> CoverageReport:
    """Evaluate all coverage metrics at once.

    Epsilon-ball radii are reported in ascending order so the coverage
    fractions are non-decreasing along the row.
    """
    eps = _resolve_epsilon(sel, epsilon)
    ball_eps = sorted(float(e) for e in epsilons)
    return CoverageReport(
        feature_radius=feature_coverage_radius(grid, sel, eps, raw=raw),
        joint_radius=joint_coverage_radius(augment(grid, eps), sel),
        spatial_radius=spatial_coverage_radius(grid, sel),
        epsilon_ball_fractions=tuple(
            epsilon_ball_coverage(grid, sel, ball_eps, eps, raw=raw)
        ),
        method=getattr(sel, "method", ""),
        ratio=getattr(getattr(sel, "config", None), "ratio", float("nan")),
        seed=getattr(getattr(sel, "config", None), "seed", 0),
    )
