"""Token-set data types, feature normalization, and coordinate augmentation.

A token grid is an (M, D) matrix of visual-token embeddings laid out over a
W x H spatial grid, optionally repeated over F frames (row-major within a
frame, frames concatenated).  Selection happens in an augmented space where
each token carries its normalized grid position scaled by an adaptive weight
derived from the feature variance: the flatter the features, the more the
spatial block dominates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_EPSILON = 1e-6


class CorepruneError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(CorepruneError, ValueError):
    """Invalid pruning configuration (ratio, k, unknown method/preset)."""


class GridFormatError(CorepruneError, ValueError):
    """Malformed grid file or inconsistent grid geometry."""


class OracleLimitError(CorepruneError, ValueError):
    """Brute-force oracle invoked outside its combinatorial guard."""


def _as_f64_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise GridFormatError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class TokenGrid:
    """M visual-token embeddings with grid geometry.

    Parameters
    ----------
    embeddings : (M, D) float64 array
        One row per token.  Token index i sits at frame i // (W*H),
        row (i % (W*H)) // W, column (i % (W*H)) % W.
    grid_width, grid_height : int
        Token columns / rows per frame.
    frames : int
        Number of frames; 1 for images.
    """

    embeddings: np.ndarray
    grid_width: int
    grid_height: int
    frames: int = 1

    def __post_init__(self):
        emb = _as_f64_matrix(self.embeddings, "embeddings")
        if self.grid_width < 1 or self.grid_height < 1 or self.frames < 1:
            raise GridFormatError(
                f"grid geometry must be positive, got W={self.grid_width} "
                f"H={self.grid_height} F={self.frames}"
            )
        m, d = emb.shape
        expected = self.frames * self.grid_width * self.grid_height
        if m != expected:
            raise GridFormatError(
                f"token count {m} does not match F*W*H = {expected}"
            )
        if m < 1 or d < 1:
            raise GridFormatError(f"grid must have M >= 1 and D >= 1, got {emb.shape}")
        if not np.all(np.isfinite(emb)):
            raise GridFormatError("embeddings contain non-finite values")
        emb.setflags(write=False)
        object.__setattr__(self, "embeddings", emb)

    @property
    def num_tokens(self) -> int:
        return self.embeddings.shape[0]

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]

    def token_position(self, index: int) -> tuple[int, int, int]:
        """(frame, row, column) of a token index, all 0-based."""
        per_frame = self.grid_width * self.grid_height
        cell = index % per_frame
        return index // per_frame, cell // self.grid_width, cell % self.grid_width

    def coordinates(self) -> np.ndarray:
        """Normalized (x/W, y/H) positions, shape (M, 2), values in (0, 1].

        Positions are 1-based so the first column/row maps to 1/W and 1/H,
        not 0.  Frames reuse the same per-frame 2-D coordinates; there is no
        temporal coordinate.
        """
        cells = np.arange(self.grid_width * self.grid_height)
        x = (cells % self.grid_width + 1) / self.grid_width
        y = (cells // self.grid_width + 1) / self.grid_height
        per_frame = np.column_stack([x, y])
        return np.tile(per_frame, (self.frames, 1))

    def with_embeddings(self, embeddings: np.ndarray) -> "TokenGrid":
        return TokenGrid(embeddings, self.grid_width, self.grid_height, self.frames)


@dataclass(frozen=True)
class AugmentedTokens:
    """Normalized features concatenated with weighted coordinates.

    ``vectors`` is (M, D+2): the first D columns are the normalized feature
    block, the last two are ``spatial_weight * (x/W, y/H)``.
    ``spatial_weight`` equals the total variance of the raw (pre-
    normalization) embeddings plus ``epsilon``.  ``mean_vector`` is the mean
    of the augmented vectors and seeds the selector's first pick.
    """

    vectors: np.ndarray
    spatial_weight: float
    epsilon: float
    mean_vector: np.ndarray

    def __post_init__(self):
        vec = _as_f64_matrix(self.vectors, "vectors")
        vec.setflags(write=False)
        object.__setattr__(self, "vectors", vec)
        mean = np.asarray(self.mean_vector, dtype=np.float64)
        mean.setflags(write=False)
        object.__setattr__(self, "mean_vector", mean)
        if self.spatial_weight < 0:
            raise ConfigError("spatial_weight must be non-negative")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")

    @property
    def num_tokens(self) -> int:
        return self.vectors.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.vectors.shape[1] - 2

    def feature_block(self) -> np.ndarray:
        return self.vectors[:, : self.feature_dim]

    def coordinate_block(self) -> np.ndarray:
        return self.vectors[:, self.feature_dim :]


@dataclass(frozen=True)
class PruneConfig:
    """Pruning parameters shared by every selector.

    ``ratio`` is the fraction of tokens retained; k = max(1, floor(ratio*M))
    unless ``k_override`` pins an exact count.  ``seed`` feeds only the
    stochastic selectors; greedy selectors ignore it.
    """

    ratio: float
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0
    k_override: Optional[int] = None

    def __post_init__(self):
        if not (0.0 < self.ratio <= 1.0):
            raise ConfigError(f"ratio must lie in (0, 1], got {self.ratio}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")
        if self.k_override is not None and self.k_override < 1:
            raise ConfigError(f"k_override must be positive, got {self.k_override}")

    def effective_k(self, num_tokens: int) -> int:
        if self.k_override is not None:
            k = self.k_override
        else:
            k = max(1, int(np.floor(self.ratio * num_tokens)))
        if k > num_tokens:
            raise ConfigError(
                f"requested k={k} exceeds token count M={num_tokens}"
            )
        return k


def total_variance(grid: TokenGrid) -> float:
    """Scalar population variance of the embeddings.

    Deviations are taken from the per-dimension mean vector and averaged
    over all M*D entries (so a single token, or any grid whose rows are all
    identical, has variance exactly 0).
    """
    emb = grid.embeddings
    return float(np.mean((emb - emb.mean(axis=0)) ** 2))


def normalize_features(grid: TokenGrid, epsilon: float = DEFAULT_EPSILON) -> TokenGrid:
    """Center by the mean vector and divide by (total variance + epsilon).

    The divisor is the variance itself, not the standard deviation; this is
    deliberate and matches the selector's augmentation weighting, which uses
    the same quantity.  Geometry is unchanged.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    emb = grid.embeddings
    scale = total_variance(grid) + epsilon
    return grid.with_embeddings((emb - emb.mean(axis=0)) / scale)


def augment(grid: TokenGrid, epsilon: float = DEFAULT_EPSILON) -> AugmentedTokens:
    """Build the (D+2)-dimensional augmented token matrix.

    The spatial weight is computed from the raw embeddings *before*
    normalization, then features are normalized and the weighted normalized
    coordinates are appended.  On constant-feature grids the feature block
    collapses to zero and the weight collapses to epsilon, so selection
    degenerates to spatial farthest-point sampling.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be positive, got {epsilon}")
    weight = total_variance(grid) + epsilon
    normalized = normalize_features(grid, epsilon)
    vectors = np.hstack([normalized.embeddings, weight * grid.coordinates()])
    return AugmentedTokens(
        vectors=vectors,
        spatial_weight=weight,
        epsilon=epsilon,
        mean_vector=vectors.mean(axis=0),
    )
