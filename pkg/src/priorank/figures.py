"""Report figures rendered next to the experiment CSV.

Median disagreement and average distance against the gold standard, per pair
budget with one line per analyst error rate, plus a robustness view across
error rates when the grid has more than one.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .experiments import RunRecord, median_by_budget, median_by_error_rate


def _budget_axis(ax, records: Sequence[RunRecord], metric: str, label: str) -> None:
    rates = sorted({r.error_rate for r in records})
    for rate in rates:
        medians = median_by_budget(records, metric, error_rate=rate)
        budgets = sorted(medians)
        ax.plot(
            budgets,
            [medians[b] for b in budgets],
            marker="o",
            label=f"{rate * 100:g}% analyst error",
        )
    ax.set_xlabel("pair budget")
    ax.set_ylabel(label)
    ax.grid(True, alpha=0.3)
    if len(rates) > 1:
        ax.legend()


def write_report_figures(
    records: Sequence[RunRecord],
    out_dir: str | Path,
    stem: str = "experiment",
) -> list[Path]:
    """Render the figures for a batch of run records; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    for metric, label, suffix in (
        ("disagreement_gs", "median disagreement vs gold standard", "disagreement"),
        ("avg_distance_gs", "median average distance vs gold standard", "avg_distance"),
    ):
        fig, ax = plt.subplots(figsize=(6, 4))
        _budget_axis(ax, records, metric, label)
        fig.tight_layout()
        path = out_dir / f"{stem}_{suffix}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    rates = sorted({r.error_rate for r in records})
    budgets = sorted({r.budget for r in records})
    if len(rates) > 1:
        fig, ax = plt.subplots(figsize=(6, 4))
        for budget in budgets:
            medians = median_by_error_rate(records, "disagreement_gs", budget)
            xs = sorted(medians)
            ax.plot(
                [x * 100 for x in xs],
                [medians[x] for x in xs],
                marker="s",
                label=f"budget {budget}",
            )
        ax.set_xlabel("analyst error rate (%)")
        ax.set_ylabel("median disagreement vs gold standard")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{stem}_robustness.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
