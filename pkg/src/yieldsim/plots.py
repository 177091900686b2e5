"""Render runs and sweeps to PNG files with a non-interactive backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scenario import SweepResult, TimeSeries

_COMPONENTS = (
    ("deposit_value", "tab:green"),
    ("debt_value", "tab:red"),
    ("lp_value", "tab:purple"),
    ("gov_value", "tab:orange"),
    ("cash", "tab:gray"),
)


def plot_run(series: TimeSeries, path: str | Path) -> Path:
    """One wealth trajectory: total plus whichever components are nonzero."""
    path = Path(path)
    days = [row.breakdown.day for row in series.rows]
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(days, series.totals(), color="tab:blue", linewidth=2.0, label="total")
    for name, color in _COMPONENTS:
        values = [getattr(row.breakdown, name) for row in series.rows]
        if any(v != 0.0 for v in values):
            ax.plot(days, values, color=color, linewidth=1.0, alpha=0.8, label=name)
    ax.set_xlabel("day")
    ax.set_ylabel("value (DAI)")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_sweep(result: SweepResult, path: str | Path) -> Path:
    """Final wealth across the sweep grid: curves for 1 axis, heatmap for 2."""
    path = Path(path)
    if len(result.axes) == 2:
        fig = _heatmap(result)
    elif len(result.axes) == 1:
        fig = _curves(result)
    else:
        return plot_run(result.runs[0], path)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _curves(result: SweepResult):
    axis = result.axes[0]
    cmap = plt.get_cmap("viridis")
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    denom = max(len(axis.values) - 1, 1)
    for i, (value, series) in enumerate(zip(axis.values, result.runs)):
        days = [row.breakdown.day for row in series.rows]
        ax.plot(
            days,
            series.totals(),
            color=cmap(i / denom),
            linewidth=1.5,
            label=f"{axis.name}={value}",
        )
    ax.set_xlabel("day")
    ax.set_ylabel("total value (DAI)")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize="small")
    return fig


def _heatmap(result: SweepResult):
    outer, inner = result.axes
    rows = len(outer.values)
    cols = len(inner.values)
    finals = result.final_totals()
    grid = [finals[r * cols : (r + 1) * cols] for r in range(rows)]
    fig, ax = plt.subplots(figsize=(7.0, 5.5))
    image = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis")
    ax.set_xticks(range(cols), labels=[f"{v:g}" if isinstance(v, float) else str(v) for v in inner.values])
    ax.set_yticks(range(rows), labels=[f"{v:g}" if isinstance(v, float) else str(v) for v in outer.values])
    ax.set_xlabel(inner.name)
    ax.set_ylabel(outer.name)
    fig.colorbar(image, ax=ax, label="final total (DAI)")
    for r in range(rows):
        for c in range(cols):
            ax.text(c, r, f"{grid[r][c]:.3f}", ha="center", va="center", fontsize=7, color="white")
    return fig
