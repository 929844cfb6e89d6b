"""Array-facing surface over the coreprune CLI.

Host pipelines hold token embeddings as in-memory numpy arrays; this package
turns those into selector, coverage, and FLOPs calls without the host ever
touching coreprune's Python API.  Every call speaks the native tool's
external interfaces only: the grid file format (JSON header + little-endian
payload), the selection JSON schema, and the ``python -m coreprune``
subcommands.  Results are therefore identical to native runs by
construction, which the test suite checks index for index.

Arrays are validated, never mutated, and never outlive a call: a valid
float64 C-contiguous aligned array is serialized zero-copy, anything else
acceptable (float32, unaligned) is copied in, and non-contiguous or
non-float inputs are rejected with a descriptive error.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

__version__ = "0.1.0"

__all__ = [
    "BindingError",
    "GridView",
    "coverage",
    "flops",
    "native_version",
    "select",
    "__version__",
]

_CLI = (sys.executable, "-m", "coreprune")


class BindingError(ValueError):
    """Invalid host input or a failure reported by the native tool."""


@dataclass(frozen=True)
class GridView:
    """Validated view of a host-provided (M, D) array plus grid geometry.

    Holds a reference to the host array (or a private copy when conversion
    was needed); the view must not outlive the host array it wraps.
    """

    array: np.ndarray
    grid_width: int
    grid_height: int
    frames: int = 1

    def __post_init__(self):
        arr = self.array
        if not isinstance(arr, np.ndarray):
            raise BindingError(
                f"expected a numpy array, got {type(arr).__name__}"
            )
        if arr.ndim != 2:
            raise BindingError(f"expected a 2-D (M, D) array, got ndim={arr.ndim}")
        if arr.dtype not in (np.float32, np.float64):
            raise BindingError(
                f"expected float32 or float64 embeddings, got dtype={arr.dtype}"
            )
        if not arr.flags.c_contiguous:
            raise BindingError(
                "expected a C-contiguous row-major array; "
                "pass numpy.ascontiguousarray(a) if the host layout differs"
            )
        if min(self.grid_width, self.grid_height, self.frames) < 1:
            raise BindingError(
                f"grid geometry must be positive, got W={self.grid_width} "
                f"H={self.grid_height} F={self.frames}"
            )
        m = self.frames * self.grid_width * self.grid_height
        if arr.shape[0] != m:
            raise BindingError(
                f"array has {arr.shape[0]} rows but geometry needs F*W*H = {m}"
            )
        if not np.isfinite(arr).all():
            raise BindingError("embeddings contain non-finite values")
        if arr.dtype == np.float64 and arr.flags.aligned:
            view = arr  # zero-copy
        else:
            view = np.ascontiguousarray(arr)  # copy-in
        object.__setattr__(self, "array", view)

    @property
    def num_tokens(self) -> int:
        return self.array.shape[0]

    def write(self, header_path: Path) -> Path:
        """Serialize in the native grid file format (header + payload)."""
        dtype = "f64" if self.array.dtype == np.float64 else "f32"
        header = {
            "M": self.num_tokens,
            "D": self.array.shape[1],
            "W": self.grid_width,
            "H": self.grid_height,
            "F": self.frames,
            "dtype": dtype,
            "layout": "row-major",
        }
        header_path.write_text(json.dumps(header, sort_keys=True) + "\n")
        payload = self.array.astype("<f8" if dtype == "f64" else "<f4", copy=False)
        header_path.with_suffix(".bin").write_bytes(payload.tobytes())
        return header_path


def _run_cli(argv: Sequence[str]) -> str:
    proc = subprocess.run(
        [*_CLI, *argv], capture_output=True, text=True, check=False
    )
    if proc.returncode != 0:
        detail = proc.stderr.strip() or proc.stdout.strip() or f"exit {proc.returncode}"
        raise BindingError(f"coreprune {argv[0]} failed: {detail}")
    return proc.stdout


def native_version() -> str:
    out = _run_cli(["--version"])
    return out.strip().split()[-1]


def select(
    array: np.ndarray,
    grid_width: int,
    grid_height: int,
    frames: int = 1,
    method: str = "evtp",
    ratio: float = 1.0,
    seed: int = 0,
    epsilon: float = 1e-6,
    k: Optional[int] = None,
) -> list[int]:
    """Run a native selector on a host array; returns ascending indices."""
    view = GridView(array, grid_width, grid_height, frames)
    with tempfile.TemporaryDirectory(prefix="coreprune-bind-") as tmp:
        grid_path = view.write(Path(tmp) / "grid.json")
        sel_path = Path(tmp) / "selection.json"
        argv = [
            "prune", str(grid_path), "--method", method, "--ratio", repr(ratio),
            "--seed", str(seed), "--eps", repr(epsilon), "--out", str(sel_path),
        ]
        if k is not None:
            argv += ["--k", str(k)]
        _run_cli(argv)
        data = json.loads(sel_path.read_text())
    return [int(i) for i in data["indices"]]


def coverage(
    array: np.ndarray,
    grid_width: int,
    grid_height: int,
    frames: int = 1,
    indices: Optional[Sequence[int]] = None,
    method: str = "evtp",
    ratio: float = 1.0,
    seed: int = 0,
    epsilon: float = 1e-6,
    epsilons: Sequence[float] = (),
) -> dict:
    """Coverage radii for a host array, either for explicit ``indices`` or
    for a fresh native selection (``method``/``ratio``/``seed``)."""
    view = GridView(array, grid_width, grid_height, frames)
    with tempfile.TemporaryDirectory(prefix="coreprune-bind-") as tmp:
        grid_path = view.write(Path(tmp) / "grid.json")
        argv = ["coverage", str(grid_path), "--eps", repr(epsilon), "--format", "json"]
        if indices is not None:
            kept = [int(i) for i in indices]
            if len(set(kept)) != len(kept):
                raise BindingError("indices contain duplicates")
            sel_path = Path(tmp) / "selection.json"
            sel_path.write_text(json.dumps({
                "method": "oracle",  # externally supplied subset
                "k": len(kept),
                "ratio": len(kept) / view.num_tokens,
                "seed": 0,
                "indices": sorted(kept),
                "pick_order": kept,
            }, sort_keys=True) + "\n")
            argv += ["--selection", str(sel_path)]
        else:
            argv += ["--method", method, "--ratio", repr(ratio), "--seed", str(seed)]
        for e in epsilons:
            argv += ["--eps-ball", repr(float(e))]
        out = _run_cli(argv)
    return json.loads(out)


def flops(preset: str, keep: int, frame_accounting: bool = False) -> dict:
    """Per-component FLOPs breakdown and reduction factor for one preset."""
    argv = ["flops", "--preset", preset, "--keep", str(keep), "--format", "json"]
    if frame_accounting:
        argv.append("--frame-accounting")
    rows = json.loads(_run_cli(argv))
    return rows[0]
