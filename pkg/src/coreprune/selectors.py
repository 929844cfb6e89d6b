"""Token selectors: spatially-augmented greedy k-center and baselines.

The coverage-seeking selectors share a farthest-first traversal that
maintains one min-distance array and touches each point once per added
center, so a full run costs O(k*M) distance evaluations.  They differ only
in the space they operate in and in how the first center is chosen:

* ``evtp``    -- augmented (feature + weighted coordinate) space, first pick
                 farthest from the mean augmented vector
* ``kcenter`` -- normalized feature space, first pick farthest from the mean

Two baselines complete the comparison set: ``divmax`` greedily maximizes the
summed pairwise spread of the kept tokens (diversity-first, coverage-blind),
and ``random`` draws a seeded uniform sample without replacement.

Every argmax breaks ties toward the smallest index, making all selectors
fully deterministic; ``random`` depends only on its seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import (
    ConfigError,
    OracleLimitError,
    PruneConfig,
    TokenGrid,
    augment,
    normalize_features,
)

METHODS = ("random", "kcenter", "evtp", "divmax", "oracle")

ORACLE_MAX_POINTS = 20
ORACLE_MAX_K = 6


@dataclass(frozen=True)
class Selection:
    """Retained token indices plus provenance.

    ``indices`` is sorted ascending so downstream consumers keep tokens in
    spatial/temporal order; ``pick_order`` preserves the greedy acquisition
    order (a permutation of ``indices``).
    """

    indices: tuple[int, ...]
    method: str
    k: int
    config: PruneConfig
    pick_order: tuple[int, ...]

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.k < 1 or len(self.indices) != self.k:
            raise ConfigError(f"selection must contain exactly k={self.k} indices")
        if len(set(self.indices)) != len(self.indices):
            raise ConfigError("selection contains duplicate indices")
        if list(self.indices) != sorted(self.indices):
            raise ConfigError("selection indices must be sorted ascending")
        if sorted(self.pick_order) != list(self.indices):
            raise ConfigError("pick_order must be a permutation of indices")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "k": self.k,
            "ratio": self.config.ratio,
            "seed": self.config.seed,
            "indices": list(self.indices),
            "pick_order": list(self.pick_order),
        }


def _make_selection(pick_order: list[int], method: str, cfg: PruneConfig) -> Selection:
    return Selection(
        indices=tuple(sorted(pick_order)),
        method=method,
        k=len(pick_order),
        config=cfg,
        pick_order=tuple(int(i) for i in pick_order),
    )


TIE_REL_TOL = 1e-12


def tie_argmax(values: np.ndarray) -> int:
    """Smallest index attaining the maximum, treating values within a
    relative 1e-12 of the max as tied.

    Exact ties between symmetric candidates can be split by one ulp when the
    whole point set is rescaled (the spatial weight multiplies coordinates),
    so a strict argmax would break ties differently in mathematically
    identical problems; the tolerance restores scale-stable tie-breaking
    while sitting far below any genuine separation at desk-scale grids.
    """
    top = values.max()
    cutoff = top * (1.0 - TIE_REL_TOL) if top > 0 else top
    return int(np.argmax(values >= cutoff))


def farthest_first(points: np.ndarray, k: int, start: int) -> list[int]:
    """Greedy max-min traversal: repeatedly add the point with the largest
    minimum squared distance to the selected set.

    Squared distances are a monotone stand-in for Euclidean inside the
    argmax; selected entries are forced to -inf so degenerate all-equal
    inputs fall through to the smallest unselected index.
    """
    m = points.shape[0]
    if not (0 < k <= m):
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    order = [int(start)]
    min_sq = np.einsum("ij,ij->i", points - points[start], points - points[start])
    min_sq[start] = -np.inf
    for _ in range(k - 1):
        nxt = tie_argmax(min_sq)
        order.append(nxt)
        new_sq = np.einsum("ij,ij->i", points - points[nxt], points - points[nxt])
        np.minimum(min_sq, new_sq, out=min_sq)
        min_sq[nxt] = -np.inf
    return order


def farthest_from_mean(points: np.ndarray, mean: np.ndarray | None = None) -> int:
    """Index of the point with the largest distance to the mean (ties: smallest index)."""
    if mean is None:
        mean = points.mean(axis=0)
    diff = points - mean
    return tie_argmax(np.einsum("ij,ij->i", diff, diff))


def farthest_pair_min_index(points: np.ndarray) -> int:
    """Smaller index of the maximally distant pair.

    Pairs are scanned in lexicographic order and only a strictly larger
    squared distance displaces the incumbent, so ties resolve to the
    earliest pair.  O(M^2) exact scan; intended for desk-scale inputs.
    """
    m = points.shape[0]
    if m == 1:
        return 0
    best_sq = -np.inf
    best_i = 0
    for i in range(m - 1):
        diff = points[i + 1 :] - points[i]
        sq = np.einsum("ij,ij->i", diff, diff)
        j = int(np.argmax(sq))
        if sq[j] > best_sq:
            best_sq = float(sq[j])
            best_i = i
    return best_i


def select_evtp(grid: TokenGrid, cfg: PruneConfig) -> Selection:
    """Greedy k-center over the spatially-augmented token space.

    Seeds the traversal with the token farthest from the mean of the
    augmented vectors, then runs farthest-first until k tokens are kept.
    """
    k = cfg.effective_k(grid.num_tokens)
    aug = augment(grid, cfg.epsilon)
    start = farthest_from_mean(aug.vectors, aug.mean_vector)
    return _make_selection(farthest_first(aug.vectors, k, start), "evtp", cfg)


def select_kcenter(grid: TokenGrid, cfg: PruneConfig) -> Selection:
    """Vanilla greedy k-center on normalized features (no coordinates)."""
    k = cfg.effective_k(grid.num_tokens)
    points = normalize_features(grid, cfg.epsilon).embeddings
    start = farthest_from_mean(points)
    return _make_selection(farthest_first(points, k, start), "kcenter", cfg)


def dispersion_sum_order(points: np.ndarray, k: int, start: int) -> list[int]:
    """Greedy max-sum dispersion: repeatedly add the point with the largest
    summed distance to the selected set.

    True (not squared) distances feed the running sums; selected entries are
    forced to -inf so degenerate all-equal inputs fall through to the
    smallest unselected index.
    """
    m = points.shape[0]
    if not (0 < k <= m):
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    order = [int(start)]
    diff = points - points[start]
    sums = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    sums[start] = -np.inf
    for _ in range(k - 1):
        nxt = tie_argmax(sums)
        order.append(nxt)
        diff = points - points[nxt]
        sums += np.sqrt(np.einsum("ij,ij->i", diff, diff))
        sums[nxt] = -np.inf
    return order


def select_divmax(grid: TokenGrid, cfg: PruneConfig) -> Selection:
    """Diversity-first baseline: greedy max-sum dispersion on normalized
    features, started from the smaller-index endpoint of the maximally
    distant pair.

    Each step adds the token with the largest total distance to the tokens
    already kept, so picks concentrate on the mutually most spread-out hull
    of the feature cloud and can leave dense regions under-covered.  This is
    the harness's stand-in for diversity-emphasizing pruning; it is not a
    reimplementation of any published method's internals.
    """
    k = cfg.effective_k(grid.num_tokens)
    points = normalize_features(grid, cfg.epsilon).embeddings
    start = farthest_pair_min_index(points)
    return _make_selection(dispersion_sum_order(points, k, start), "divmax", cfg)


def select_random(grid: TokenGrid, cfg: PruneConfig) -> Selection:
    """Seeded uniform sample of k indices without replacement."""
    k = cfg.effective_k(grid.num_tokens)
    rng = np.random.default_rng(cfg.seed)
    picks = rng.choice(grid.num_tokens, size=k, replace=False)
    return _make_selection([int(i) for i in picks], "random", cfg)


SELECTORS = {
    "evtp": select_evtp,
    "kcenter": select_kcenter,
    "divmax": select_divmax,
    "random": select_random,
}


def select(grid: TokenGrid, method: str, cfg: PruneConfig) -> Selection:
    """Dispatch by method name; raises ConfigError for unknown methods."""
    try:
        fn = SELECTORS[method]
    except KeyError:
        raise ConfigError(
            f"unknown method {method!r}; expected one of {sorted(SELECTORS)}"
        ) from None
    return fn(grid, cfg)


def oracle_optimal_radius(points: np.ndarray, k: int) -> tuple[float, tuple[int, ...]]:
    """Exhaustive optimal k-center: minimal coverage radius over all C(M, k)
    subsets, plus the lexicographically smallest witness achieving it.

    Guarded at M <= 20 and k <= 6; beyond that the enumeration is refused.
    """
    points = np.asarray(points, dtype=np.float64)
    m = points.shape[0]
    if m > ORACLE_MAX_POINTS or k > ORACLE_MAX_K:
        raise OracleLimitError(
            f"oracle limited to M <= {ORACLE_MAX_POINTS} and k <= {ORACLE_MAX_K}, "
            f"got M={m} k={k}"
        )
    if not (0 < k <= m):
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    pairwise = cdist(points, points)
    best_radius = np.inf
    best_subset: tuple[int, ...] = ()
    for subset in itertools.combinations(range(m), k):
        radius = pairwise[:, subset].min(axis=1).max()
        if radius < best_radius:
            best_radius = radius
            best_subset = subset
    return float(best_radius), best_subset


def greedy_gap_sequence(points: np.ndarray, pick_order) -> list[float]:
    """Min distance of each pick to the set of earlier picks (first pick
    excluded).  For a farthest-first traversal this sequence is
    non-increasing; recomputed here independently of the selector loop."""
    order = list(pick_order)
    gaps = []
    for t in range(1, len(order)):
        gaps.append(float(cdist(points[order[t]][None, :], points[order[:t]]).min()))
    return gaps
