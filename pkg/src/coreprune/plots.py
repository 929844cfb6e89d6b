"""Figure rendering for sweep results.

Figures are derived artifacts: nothing downstream consumes them, and tests
never parse them.  SVG output is pinned (fixed hash salt, no embedded date)
so replaying a sweep reproduces the files byte-for-byte.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "coreprune"

import matplotlib.pyplot as plt

METHOD_STYLES = {
    "random": dict(color="#888888", marker="o", linestyle="--"),
    "kcenter": dict(color="#1f77b4", marker="s", linestyle="-"),
    "evtp": dict(color="#d62728", marker="^", linestyle="-"),
    "divmax": dict(color="#2ca02c", marker="d", linestyle=":"),
}


def _mean_by_ratio(result, radius_attr: str) -> dict[str, tuple[list[float], list[float]]]:
    series = {}
    for method in result.spec.methods:
        xs, ys = [], []
        for ratio in sorted(result.spec.ratios):
            vals = [
                getattr(row.report, radius_attr)
                for row in result.rows
                if row.method == method and row.ratio == ratio and row.report is not None
            ]
            if vals:
                xs.append(ratio)
                ys.append(sum(vals) / len(vals))
        series[method] = (xs, ys)
    return series


def _radius_figure(result, radius_attr: str, ylabel: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4), constrained_layout=True)
    for method, (xs, ys) in _mean_by_ratio(result, radius_attr).items():
        if not xs:
            continue
        ax.plot(xs, ys, label=method, markersize=5, **METHOD_STYLES.get(method, {}))
    ax.set_xlabel("retained token ratio")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(frameon=False)
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)
    return path


def render_sweep_figures(result, fig_dir: str | Path) -> dict[str, Path]:
    """Mean coverage radius vs ratio, one curve per method, one file per space."""
    fig_dir = Path(fig_dir)
    fig_dir.mkdir(parents=True, exist_ok=True)
    return {
        "fig_feature": _radius_figure(
            result, "feature_radius", "mean feature coverage radius", fig_dir / "feature_radius_vs_ratio.svg"
        ),
        "fig_spatial": _radius_figure(
            result, "spatial_radius", "mean spatial coverage radius", fig_dir / "spatial_radius_vs_ratio.svg"
        ),
    }
