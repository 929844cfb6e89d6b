"""On-disk formats: token grids, selections, coverage reports.

A grid is stored as two files sharing a stem: ``<stem>.json`` holds the
geometry header and ``<stem>.bin`` the raw little-endian row-major payload
(M*D values).  Small hand-made fixtures can instead use a CSV with header
``x,y,frame,f0..fD-1`` where x/y are 1-based grid positions and frame is a
0-based frame index.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import GridFormatError, PruneConfig, TokenGrid
from .selectors import Selection

_DTYPES = {"f32": "<f4", "f64": "<f8"}


def _payload_path(header_path: Path) -> Path:
    return header_path.with_suffix(".bin")


def write_grid(grid: TokenGrid, header_path: str | Path, dtype: str = "f64") -> Path:
    """Write header + payload; returns the header path."""
    if dtype not in _DTYPES:
        raise GridFormatError(f"dtype must be one of {sorted(_DTYPES)}, got {dtype!r}")
    header_path = Path(header_path)
    header = {
        "M": grid.num_tokens,
        "D": grid.dim,
        "W": grid.grid_width,
        "H": grid.grid_height,
        "F": grid.frames,
        "dtype": dtype,
        "layout": "row-major",
    }
    header_path.write_text(json.dumps(header, sort_keys=True) + "\n")
    payload = np.ascontiguousarray(grid.embeddings, dtype=_DTYPES[dtype])
    _payload_path(header_path).write_bytes(payload.tobytes())
    return header_path


def read_grid(header_path: str | Path) -> TokenGrid:
    header_path = Path(header_path)
    try:
        header = json.loads(header_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise GridFormatError(f"cannot read grid header {header_path}: {exc}") from exc
    for key in ("M", "D", "W", "H", "F", "dtype", "layout"):
        if key not in header:
            raise GridFormatError(f"grid header missing field {key!r}")
    if header["layout"] != "row-major":
        raise GridFormatError(f"unsupported layout {header['layout']!r}")
    if header["dtype"] not in _DTYPES:
        raise GridFormatError(f"unsupported dtype {header['dtype']!r}")
    m, d = int(header["M"]), int(header["D"])
    payload_path = _payload_path(header_path)
    try:
        raw = payload_path.read_bytes()
    except OSError as exc:
        raise GridFormatError(f"cannot read grid payload {payload_path}: {exc}") from exc
    dt = np.dtype(_DTYPES[header["dtype"]])
    if len(raw) != m * d * dt.itemsize:
        raise GridFormatError(
            f"payload size {len(raw)} bytes does not match M*D={m}*{d} {header['dtype']} values"
        )
    emb = np.frombuffer(raw, dtype=dt).reshape(m, d).astype(np.float64)
    return TokenGrid(emb, int(header["W"]), int(header["H"]), int(header["F"]))


def read_grid_csv(path: str | Path) -> TokenGrid:
    """Load a hand-made CSV fixture (header ``x,y,frame,f0..fD-1``).

    Geometry is inferred from the maxima; every (frame, y, x) cell must
    appear exactly once, and rows may come in any order.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise GridFormatError(f"cannot read grid CSV {path}: {exc}") from exc
    if not rows:
        raise GridFormatError(f"grid CSV {path} is empty")
    header = rows[0]
    if header[:3] != ["x", "y", "frame"] or len(header) < 4:
        raise GridFormatError(
            "grid CSV header must start with x,y,frame followed by f0..fD-1"
        )
    d = len(header) - 3
    expected_feats = [f"f{i}" for i in range(d)]
    if header[3:] != expected_feats:
        raise GridFormatError(f"grid CSV feature columns must be {expected_feats}")
    records = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3 + d:
            raise GridFormatError(f"grid CSV line {lineno}: expected {3 + d} cells")
        try:
            x, y, frame = int(row[0]), int(row[1]), int(row[2])
            feats = [float(v) for v in row[3:]]
        except ValueError as exc:
            raise GridFormatError(f"grid CSV line {lineno}: {exc}") from exc
        records.append((x, y, frame, feats))
    if not records:
        raise GridFormatError(f"grid CSV {path} has no data rows")
    w = max(r[0] for r in records)
    h = max(r[1] for r in records)
    f = max(r[2] for r in records) + 1
    if min(r[0] for r in records) < 1 or min(r[1] for r in records) < 1 or min(
        r[2] for r in records
    ) < 0:
        raise GridFormatError("grid CSV positions must have x,y >= 1 and frame >= 0")
    m = f * w * h
    emb = np.full((m, d), np.nan)
    for x, y, frame, feats in records:
        idx = frame * w * h + (y - 1) * w + (x - 1)
        if not np.all(np.isnan(emb[idx])):
            raise GridFormatError(f"grid CSV cell (x={x}, y={y}, frame={frame}) repeated")
        emb[idx] = feats
    if np.any(np.isnan(emb)):
        raise GridFormatError(
            f"grid CSV covers {len(records)} cells but geometry {f}x{h}x{w} needs {m}"
        )
    return TokenGrid(emb, w, h, f)


def load_grid(path: str | Path) -> TokenGrid:
    """Dispatch on extension: .csv fixtures, anything else the header format."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_grid_csv(path)
    return read_grid(path)


def selection_to_json(sel: Selection) -> str:
    return json.dumps(sel.to_dict(), sort_keys=True) + "\n"


def write_selection(sel: Selection, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(selection_to_json(sel))
    return path


def read_selection(path: str | Path) -> Selection:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise GridFormatError(f"cannot read selection {path}: {exc}") from exc
    try:
        cfg = PruneConfig(ratio=data["ratio"], seed=data["seed"])
        return Selection(
            indices=tuple(data["indices"]),
            method=data["method"],
            k=data["k"],
            config=cfg,
            pick_order=tuple(data["pick_order"]),
        )
    except KeyError as exc:
        raise GridFormatError(f"selection {path} missing field {exc}") from exc
