"""Four-panel figure assembly.

Layout mirrors the simulator's headline comparison: (a) percent difference
of the mean angle vs kick, (b) same for the angle standard deviation,
(c) overlaid densities at the earlier snapshot kick, (d) at the later one.
Relativistic curves are solid, non-relativistic dashed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import SchemaError, Series, load_series, pair_snapshots

PANEL_LABELS = ("(a)", "(b)", "(c)", "(d)")


@dataclass(frozen=True)
class FigureSpec:
    series_csv: Path
    snapshot_paths: tuple[Path, Path, Path, Path]  # early pair then late pair
    output_image: Path
    panel_labels: tuple[str, str, str, str] = PANEL_LABELS
    log_y: bool = False


def _plot_diff(ax, series: Series, values: np.ndarray, label: str, ylabel: str,
               log_y: bool) -> None:
    keep = ~np.isnan(values)
    ax.plot(series.kicks[keep], values[keep], color="black", linewidth=0.9)
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("kick")
    ax.set_ylabel(ylabel)
    ax.set_title(label, loc="left")


def _plot_overlay(ax, rel, nr, label: str) -> None:
    ax.plot(rel.angles, rel.values, "-", color="black", linewidth=1.0,
            label="relativistic")
    ax.plot(nr.angles, nr.values, "--", color="0.35", linewidth=1.0,
            label="non-relativistic")
    ax.set_xlim(0.0, 2.0 * np.pi)
    ax.set_xlabel(r"$\phi$ (rad)")
    ax.set_ylabel("probability density")
    ax.set_title(f"{label} kick {rel.kick}", loc="left")
    ax.legend(fontsize=8, frameon=False)


def render_figure(spec: FigureSpec) -> Path:
    """Render the four-panel image; returns the output path."""
    series = load_series(spec.series_csv)
    early = pair_snapshots(spec.snapshot_paths[:2])
    late = pair_snapshots(spec.snapshot_paths[2:])
    if early[0].kick > late[0].kick:
        early, late = late, early
    known = set(int(k) for k in series.kicks)
    for pair in (early, late):
        if pair[0].kick not in known:
            raise SchemaError(
                f"snapshot kick {pair[0].kick} does not appear in the series CSV"
            )

    fig, axes = plt.subplots(2, 2, figsize=(9.0, 7.0))
    labels = spec.panel_labels
    _plot_diff(axes[0][0], series, series.rel_diff_mean_pct, labels[0],
               "mean angle difference (%)", spec.log_y)
    _plot_diff(axes[0][1], series, series.rel_diff_std_pct, labels[1],
               "angle std difference (%)", spec.log_y)
    _plot_overlay(axes[1][0], *early, labels[2])
    _plot_overlay(axes[1][1], *late, labels[3])
    fig.tight_layout()
    out = Path(spec.output_image)
    # strip the writer tag so identical inputs give identical bytes
    fig.savefig(out, dpi=150, metadata={"Software": None})
    plt.close(fig)
    return out
