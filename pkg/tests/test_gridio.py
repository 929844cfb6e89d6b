import json

import numpy as np
import pytest

from coreprune import GridFormatError, PruneConfig, TokenGrid, select_kcenter
from coreprune.gridio import (
    load_grid,
    read_grid,
    read_grid_csv,
    read_selection,
    write_grid,
    write_selection,
)


@pytest.fixture
def sample_grid():
    rng = np.random.default_rng(12)
    return TokenGrid(rng.normal(size=(12, 5)), 3, 2, 2)


class TestBinaryFormat:
    def test_round_trip_f64(self, sample_grid, tmp_path):
        path = write_grid(sample_grid, tmp_path / "g.json")
        loaded = read_grid(path)
        np.testing.assert_array_equal(loaded.embeddings, sample_grid.embeddings)
        assert (loaded.grid_width, loaded.grid_height, loaded.frames) == (3, 2, 2)

    def test_round_trip_f32_lossy_but_consistent(self, sample_grid, tmp_path):
        path = write_grid(sample_grid, tmp_path / "g.json", dtype="f32")
        loaded = read_grid(path)
        np.testing.assert_array_equal(
            loaded.embeddings, sample_grid.embeddings.astype("<f4").astype(np.float64)
        )

    def test_header_fields(self, sample_grid, tmp_path):
        path = write_grid(sample_grid, tmp_path / "g.json")
        header = json.loads(path.read_text())
        assert header == {
            "M": 12, "D": 5, "W": 3, "H": 2, "F": 2,
            "dtype": "f64", "layout": "row-major",
        }

    def test_payload_size_mismatch(self, sample_grid, tmp_path):
        path = write_grid(sample_grid, tmp_path / "g.json")
        (tmp_path / "g.bin").write_bytes(b"\x00" * 10)
        with pytest.raises(GridFormatError, match="payload size"):
            read_grid(path)

    def test_missing_payload(self, sample_grid, tmp_path):
        path = write_grid(sample_grid, tmp_path / "g.json")
        (tmp_path / "g.bin").unlink()
        with pytest.raises(GridFormatError):
            read_grid(path)

    def test_malformed_header(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("not json at all")
        with pytest.raises(GridFormatError):
            read_grid(bad)

    def test_missing_header_field(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"M": 4, "D": 1}))
        with pytest.raises(GridFormatError, match="missing field"):
            read_grid(bad)


class TestCsvFormat:
    def test_out_of_order_rows(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text(
            "x,y,frame,f0,f1\n"
            "2,1,0,3.0,4.0\n"
            "1,2,0,5.0,6.0\n"
            "1,1,0,1.0,2.0\n"
            "2,2,0,7.0,8.0\n"
        )
        grid = read_grid_csv(path)
        assert (grid.grid_width, grid.grid_height, grid.frames) == (2, 2, 1)
        np.testing.assert_array_equal(
            grid.embeddings, [[1, 2], [3, 4], [5, 6], [7, 8]]
        )

    def test_video_frames(self, tmp_path):
        path = tmp_path / "g.csv"
        rows = ["x,y,frame,f0"]
        for frame in (0, 1):
            for y in (1, 2):
                for x in (1,):
                    rows.append(f"{x},{y},{frame},{frame * 10 + y}.0")
        path.write_text("\n".join(rows) + "\n")
        grid = read_grid_csv(path)
        assert grid.frames == 2
        np.testing.assert_array_equal(grid.embeddings.ravel(), [1, 2, 11, 12])

    def test_missing_cell_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("x,y,frame,f0\n1,1,0,1.0\n2,2,0,4.0\n")
        with pytest.raises(GridFormatError, match="geometry"):
            read_grid_csv(path)

    def test_duplicate_cell_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("x,y,frame,f0\n1,1,0,1.0\n1,1,0,2.0\n")
        with pytest.raises(GridFormatError, match="repeated"):
            read_grid_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("col,row,t,f0\n1,1,0,1.0\n")
        with pytest.raises(GridFormatError, match="header"):
            read_grid_csv(path)

    def test_load_grid_dispatches_on_extension(self, sample_grid, tmp_path):
        bin_path = write_grid(sample_grid, tmp_path / "g.json")
        assert load_grid(bin_path).num_tokens == 12
        csv_path = tmp_path / "g.csv"
        csv_path.write_text("x,y,frame,f0\n1,1,0,1.0\n")
        assert load_grid(csv_path).num_tokens == 1


class TestSelectionSerialization:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(13)
        grid = TokenGrid(rng.normal(size=(16, 3)), 4, 4, 1)
        sel = select_kcenter(grid, PruneConfig(ratio=0.25, seed=5))
        path = write_selection(sel, tmp_path / "sel.json")
        loaded = read_selection(path)
        assert loaded.indices == sel.indices
        assert loaded.pick_order == sel.pick_order
        assert loaded.method == sel.method
        assert loaded.k == sel.k

    def test_byte_stable(self, tmp_path):
        rng = np.random.default_rng(14)
        grid = TokenGrid(rng.normal(size=(9, 2)), 3, 3, 1)
        sel = select_kcenter(grid, PruneConfig(ratio=0.5))
        a = write_selection(sel, tmp_path / "a.json").read_bytes()
        b = write_selection(sel, tmp_path / "b.json").read_bytes()
        assert a == b

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "sel.json"
        path.write_text(json.dumps({"method": "kcenter", "k": 1}))
        with pytest.raises(GridFormatError, match="missing field"):
            read_selection(path)
