import numpy as np
import pytest

from coreprune import (
    ConfigError,
    OracleLimitError,
    PruneConfig,
    Selection,
    TokenGrid,
    augment,
    feature_coverage_radius,
    joint_coverage_radius,
    normalize_features,
    oracle_optimal_radius,
    select,
    select_divmax,
    select_evtp,
    select_kcenter,
    select_random,
)
from coreprune.selectors import farthest_first, farthest_from_mean, greedy_gap_sequence

from conftest import random_grid


class TestSelectEvtp:
    def test_full_ratio_keeps_everything(self, corner_grid):
        sel = select_evtp(corner_grid, PruneConfig(ratio=1.0))
        assert sel.indices == (0, 1, 2, 3)

    def test_corner_grid_picks_opposite_diagonal(self, corner_grid):
        # All four corners tie for farthest-from-mean (symmetric grid), so
        # the smallest index starts; the farthest point from corner 0 is the
        # diagonally opposite corner 3.
        sel = select_evtp(corner_grid, PruneConfig(ratio=0.5))
        assert sel.pick_order == (0, 3)
        assert sel.indices == (0, 3)

    def test_corner_grid_within_twice_oracle(self, corner_grid):
        cfg = PruneConfig(ratio=0.5)
        sel = select_evtp(corner_grid, cfg)
        aug = augment(corner_grid, cfg.epsilon)
        opt_radius, _ = oracle_optimal_radius(aug.vectors, 2)
        assert joint_coverage_radius(aug, sel) <= 2.0 * opt_radius + 1e-12

    def test_k_floor_clamps_to_one(self):
        rng = np.random.default_rng(0)
        grid = TokenGrid(rng.normal(size=(10, 3)), 5, 2, 1)
        cfg = PruneConfig(ratio=0.05)
        sel = select_evtp(grid, cfg)
        assert sel.k == 1
        aug = augment(grid, cfg.epsilon)
        expected = farthest_from_mean(aug.vectors, aug.mean_vector)
        assert sel.indices == (expected,)

    def test_ignores_seed(self, corner_grid):
        a = select_evtp(corner_grid, PruneConfig(ratio=0.5, seed=1))
        b = select_evtp(corner_grid, PruneConfig(ratio=0.5, seed=999))
        assert a.indices == b.indices and a.pick_order == b.pick_order

    def test_k_above_m_rejected(self, corner_grid):
        with pytest.raises(ConfigError):
            select_evtp(corner_grid, PruneConfig(ratio=1.0, k_override=5))


class TestSelectKcenter:
    def test_constant_grid_tie_breaking(self):
        grid = TokenGrid(np.full((6, 2), 4.0), 3, 2, 1)
        sel = select_kcenter(grid, PruneConfig(ratio=0.5))
        assert sel.indices == (0, 1, 2)
        assert sel.pick_order == (0, 1, 2)

    def test_line_hand_example(self):
        # raw {0, 0.1, 10}: farthest from mean is 10, then 0; the straggler
        # 0.1 sits 0.1 away from center 0 in raw units.
        grid = TokenGrid(np.array([[0.0], [0.1], [10.0]]), 3, 1, 1)
        sel = select_kcenter(grid, PruneConfig(ratio=2 / 3))
        assert sel.pick_order == (2, 0)
        assert sel.indices == (0, 2)
        assert feature_coverage_radius(grid, sel, raw=True) == pytest.approx(0.1, rel=1e-12)

    def test_full_selection_zero_radius(self, line_grid):
        sel = select_kcenter(line_grid, PruneConfig(ratio=1.0))
        assert feature_coverage_radius(line_grid, sel) == 0.0

    def test_ignores_seed(self, line_grid):
        a = select_kcenter(line_grid, PruneConfig(ratio=2 / 3, seed=5))
        b = select_kcenter(line_grid, PruneConfig(ratio=2 / 3, seed=6))
        assert a.indices == b.indices


class TestSelectRandom:
    def test_full_ratio_keeps_everything(self):
        grid = TokenGrid(np.arange(8.0).reshape(4, 2), 2, 2, 1)
        sel = select_random(grid, PruneConfig(ratio=1.0, seed=3))
        assert sel.indices == (0, 1, 2, 3)

    def test_same_seed_same_selection(self):
        rng = np.random.default_rng(7)
        grid = TokenGrid(rng.normal(size=(100, 4)), 10, 10, 1)
        cfg = PruneConfig(ratio=0.2, seed=7)
        assert select_random(grid, cfg) == select_random(grid, cfg)

    def test_different_seed_usually_differs(self):
        rng = np.random.default_rng(8)
        grid = TokenGrid(rng.normal(size=(100, 4)), 10, 10, 1)
        a = select_random(grid, PruneConfig(ratio=0.2, seed=1))
        b = select_random(grid, PruneConfig(ratio=0.2, seed=2))
        assert a.indices != b.indices

    def test_indices_in_range_no_duplicates(self):
        rng = np.random.default_rng(9)
        grid = TokenGrid(rng.normal(size=(50, 2)), 10, 5, 1)
        sel = select_random(grid, PruneConfig(ratio=0.3, seed=11))
        assert len(set(sel.indices)) == sel.k
        assert all(0 <= i < 50 for i in sel.indices)


class TestSelectDivmax:
    def test_full_ratio_keeps_everything(self, line_grid):
        sel = select_divmax(line_grid, PruneConfig(ratio=1.0))
        assert sel.indices == (0, 1, 2)

    def test_picks_farthest_pair(self):
        grid = TokenGrid(np.array([[0.0], [5.0], [10.0]]), 3, 1, 1)
        sel = select_divmax(grid, PruneConfig(ratio=2 / 3))
        assert sel.indices == (0, 2)
        assert sel.pick_order == (0, 2)

    def test_constant_grid_tie_breaking(self):
        grid = TokenGrid(np.full((4, 2), 1.0), 2, 2, 1)
        sel = select_divmax(grid, PruneConfig(ratio=0.5))
        assert sel.indices == (0, 1)

    def test_ignores_seed(self):
        rng = np.random.default_rng(10)
        grid = TokenGrid(rng.normal(size=(20, 3)), 5, 4, 1)
        a = select_divmax(grid, PruneConfig(ratio=0.25, seed=0))
        b = select_divmax(grid, PruneConfig(ratio=0.25, seed=42))
        assert a.indices == b.indices


class TestOracle:
    def test_full_subset_zero_radius(self):
        pts = np.random.default_rng(0).normal(size=(5, 2))
        radius, witness = oracle_optimal_radius(pts, 5)
        assert radius == 0.0
        assert witness == (0, 1, 2, 3, 4)

    def test_unit_square_corners(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        radius, witness = oracle_optimal_radius(pts, 2)
        assert radius == pytest.approx(1.0, abs=1e-15)
        assert witness == (0, 1)  # lexicographically smallest optimum

    def test_collinear_singleton(self):
        pts = np.array([[0.0], [1.0], [2.0]])
        radius, witness = oracle_optimal_radius(pts, 1)
        assert radius == 1.0
        assert witness == (1,)

    def test_size_guard(self):
        pts = np.zeros((21, 2))
        with pytest.raises(OracleLimitError):
            oracle_optimal_radius(pts, 2)
        with pytest.raises(OracleLimitError):
            oracle_optimal_radius(np.zeros((10, 2)), 7)


class TestGreedyProperties:
    def test_two_approximation_sample(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            grid = random_grid(rng)
            k = int(rng.integers(1, min(5, grid.num_tokens) + 1))
            cfg = PruneConfig(ratio=1.0, k_override=k)
            sel = select_kcenter(grid, cfg)
            pts = normalize_features(grid, cfg.epsilon).embeddings
            opt, _ = oracle_optimal_radius(pts, k)
            assert feature_coverage_radius(grid, sel) <= 2.0 * opt + 1e-12

    def test_gap_sequence_non_increasing(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            grid = random_grid(rng)
            k = max(2, grid.num_tokens // 2)
            cfg = PruneConfig(ratio=1.0, k_override=k)
            sel = select_kcenter(grid, cfg)
            pts = normalize_features(grid, cfg.epsilon).embeddings
            gaps = greedy_gap_sequence(pts, sel.pick_order)
            assert all(gaps[i + 1] <= gaps[i] + 1e-12 for i in range(len(gaps) - 1))

    def test_nested_prefix_ratio_monotonicity(self):
        rng = np.random.default_rng(23)
        grid = TokenGrid(rng.normal(size=(36, 4)), 6, 6, 1)
        for selector in (select_kcenter, select_evtp):
            r_small = feature_coverage_radius(grid, selector(grid, PruneConfig(ratio=0.1)))
            r_large = feature_coverage_radius(grid, selector(grid, PruneConfig(ratio=0.4)))
            assert r_large <= r_small + 1e-12

    def test_greedy_prefixes_are_nested(self):
        rng = np.random.default_rng(24)
        grid = TokenGrid(rng.normal(size=(30, 3)), 6, 5, 1)
        small = select_evtp(grid, PruneConfig(ratio=0.2))
        large = select_evtp(grid, PruneConfig(ratio=0.5))
        assert large.pick_order[: small.k] == small.pick_order

    def test_constant_features_reduce_to_spatial_kcenter(self):
        grid = TokenGrid(np.full((24, 5), 2.5), 6, 4, 1)
        cfg = PruneConfig(ratio=0.25)
        sel = select_evtp(grid, cfg)
        coords = grid.coordinates()
        start = farthest_from_mean(coords)
        spatial = farthest_first(coords, cfg.effective_k(24), start)
        assert sel.pick_order == tuple(spatial)

    def test_permutation_equivariance_tie_free(self):
        rng = np.random.default_rng(25)
        for selector in (select_kcenter, select_divmax):
            emb = rng.normal(size=(18, 3))
            grid = TokenGrid(emb, 6, 3, 1)
            perm = rng.permutation(18)
            permuted = TokenGrid(emb[perm], 6, 3, 1)
            cfg = PruneConfig(ratio=0.3)
            base = selector(grid, cfg).indices
            moved = selector(permuted, cfg).indices
            # indices in the permuted grid name the same original tokens
            assert sorted(perm[list(moved)]) == sorted(base)


class TestSelectionType:
    def test_dispatch_unknown_method(self, line_grid):
        with pytest.raises(ConfigError, match="unknown method"):
            select(line_grid, "attention", PruneConfig(ratio=0.5))

    def test_duplicate_indices_rejected(self, full_config):
        with pytest.raises(ConfigError):
            Selection((1, 1), "kcenter", 2, full_config, (1, 1))

    def test_unsorted_indices_rejected(self, full_config):
        with pytest.raises(ConfigError):
            Selection((2, 1), "kcenter", 2, full_config, (2, 1))

    def test_pick_order_must_permute_indices(self, full_config):
        with pytest.raises(ConfigError):
            Selection((1, 2), "kcenter", 2, full_config, (1, 3))

    def test_to_dict_schema(self, line_grid):
        sel = select_kcenter(line_grid, PruneConfig(ratio=2 / 3, seed=4))
        data = sel.to_dict()
        assert set(data) == {"method", "k", "ratio", "seed", "indices", "pick_order"}
        assert data["method"] == "kcenter"
        assert data["k"] == 2
        assert data["seed"] == 4
