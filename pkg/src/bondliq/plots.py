"""Figure rendering for CLI reports.

Renders the optimization and sweep outputs to PNG files next to the
delimited data so a run leaves both machine-readable rows and
ready-to-look-at charts.  Uses the Agg backend and strips metadata so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .optimizer import StrategyResult

__all__ = [
    "plot_strategy_times",
    "plot_correlation_sweep",
    "plot_deadline_sweep",
]

_STRATEGY_COLORS = {"naive": "tab:gray", "individual": "tab:blue", "portfolio": "tab:red"}
_SAVEFIG_KW = {"dpi": 130, "metadata": {"Software": None}}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)
    return path


def plot_strategy_times(
    results: Sequence[StrategyResult], ids: Sequence[str], path: Path
) -> Path:
    """Horizontal bars of per-asset horizons for each strategy."""
    fig, ax = plt.subplots(figsize=(8.0, max(3.0, 0.28 * len(ids) + 1.2)))
    n = len(ids)
    height = 0.8 / max(len(results), 1)
    for j, res in enumerate(results):
        offs = [i + (j - (len(results) - 1) / 2.0) * height for i in range(n)]
        ax.barh(
            offs,
            res.schedule.times,
            height=height,
            label=res.strategy,
            color=_STRATEGY_COLORS.get(res.strategy),
        )
    ax.set_yticks(range(n))
    ax.set_yticklabels(ids, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("liquidation horizon (days)")
    ax.set_title("Per-asset liquidation horizons")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_correlation_sweep(rows: Sequence[dict], base: Path) -> list[Path]:
    """Cost and horizon curves versus uniform correlation.

    ``rows`` are the long-format sweep records (one per correlation and
    strategy).  Writes ``<base>_cost.png`` and ``<base>_times.png``.
    """
    strategies = sorted({r["strategy"] for r in rows}, key=str)
    fig1, ax1 = plt.subplots(figsize=(6.4, 4.2))
    for strat in strategies:
        pts = [(r["correlation"], r["liq_cost"]) for r in rows if r["strategy"] == strat]
        xs, ys = zip(*sorted(pts))
        ax1.plot(xs, ys, marker="o", ms=3, label=strat, color=_STRATEGY_COLORS.get(strat))
    ax1.set_xlabel("uniform pairwise correlation")
    ax1.set_ylabel("liquidation cost")
    ax1.set_title("Liquidation cost vs correlation")
    ax1.legend(fontsize=8)
    out1 = _save(fig1, base.with_name(base.stem + "_cost.png"))

    fig2, ax2 = plt.subplots(figsize=(6.4, 4.2))
    pts = [(r["correlation"], r["t_median"], r["t_max"]) for r in rows if r["strategy"] == "portfolio"]
    pts.sort()
    xs = [p[0] for p in pts]
    ax2.plot(xs, [p[1] for p in pts], marker="o", ms=3, label="T median")
    ax2.plot(xs, [p[2] for p in pts], marker="s", ms=3, label="T max")
    ax2.set_xlabel("uniform pairwise correlation")
    ax2.set_ylabel("days")
    ax2.set_title("Optimal horizons vs correlation")
    ax2.legend(fontsize=8)
    out2 = _save(fig2, base.with_name(base.stem + "_times.png"))
    return [out1, out2]


def plot_deadline_sweep(rows: Sequence[dict], base: Path) -> list[Path]:
    """Cost and premium curves versus the liquidation deadline.

    Writes ``<base>_cost.png`` and ``<base>_premium.png``.
    """
    rows = sorted(rows, key=lambda r: r["deadline"])
    xs = [r["deadline"] for r in rows]

    fig1, ax1 = plt.subplots(figsize=(6.4, 4.2))
    ax1.plot(xs, [r["liq_cost"] for r in rows], marker="o", ms=3, label="total cost")
    ax1.plot(xs, [r["direct_cost"] for r in rows], marker="s", ms=3, label="direct cost")
    ax1.set_xscale("log")
    ax1.set_xlabel("deadline (days)")
    ax1.set_ylabel("cost")
    ax1.set_title("Liquidation cost vs deadline")
    ax1.legend(fontsize=8)
    out1 = _save(fig1, base.with_name(base.stem + "_cost.png"))

    fig2, ax2 = plt.subplots(figsize=(6.4, 4.2))
    ax2.plot(xs, [r["premium"] for r in rows], marker="o", ms=3, color="tab:red")
    ax2.set_xscale("log")
    ax2.set_xlabel("deadline (days)")
    ax2.set_ylabel("excess cost over loosest deadline")
    ax2.set_title("Short-deadline premium")
    out2 = _save(fig2, base.with_name(base.stem + "_premium.png"))
    return [out1, out2]
