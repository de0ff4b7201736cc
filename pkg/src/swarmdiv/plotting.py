"""Figure rendering for campaign reports.

Every helper writes a single PNG next to the delimited report files. Log
scaling is applied only when a series is strictly positive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_convergence_figure",
    "save_diversity_figure",
    "save_correlation_figure",
    "save_compare_figure",
]


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _smart_yscale(ax, series_list):
    stacked = np.concatenate([np.asarray(s, float) for s in series_list])
    stacked = stacked[np.isfinite(stacked)]
    if stacked.size and np.all(stacked > 0.0):
        ax.set_yscale("log")


def save_convergence_figure(path, curves: dict) -> None:
    """Run-averaged best fitness per algorithm. ``curves[tag] = (n, mean_best)``."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for tag, (n, mean_best) in curves.items():
        ax.plot(n, mean_best, label=tag, linewidth=1.4)
    _smart_yscale(ax, [c[1] for c in curves.values()])
    ax.set_xlabel("iteration")
    ax.set_ylabel("best fitness (run average)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _finish(fig, path)


def save_diversity_figure(path, tag: str, n, d_x, d_p, s_x, s_p) -> None:
    """Run-averaged distance and entropy diversities for one algorithm."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(9.5, 4.0))
    left.plot(n, d_x, label="d_X", linewidth=1.4)
    left.plot(n, d_p, label="d_P", linewidth=1.4, linestyle="--")
    _smart_yscale(left, [d_x, d_p])
    left.set_xlabel("iteration")
    left.set_ylabel("distance diversity")
    left.legend(fontsize=8)
    left.grid(alpha=0.3)
    right.plot(n, s_x, label="s_X", linewidth=1.4)
    right.plot(n, s_p, label="s_P", linewidth=1.4, linestyle="--")
    right.set_xlabel("iteration")
    right.set_ylabel("entropy diversity (bits)")
    right.legend(fontsize=8)
    right.grid(alpha=0.3)
    fig.suptitle(tag)
    _finish(fig, path)


def save_correlation_figure(path, tag: str, n, rho_by_label: dict) -> None:
    """Per-checkpoint rank correlations; ``None`` entries plot as gaps."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for label, values in rho_by_label.items():
        y = np.array([np.nan if v is None else v for v in values], dtype=float)
        ax.plot(n, y, label=label, linewidth=1.4)
    ax.axhline(0.0, color="black", linewidth=0.8)
    ax.set_ylim(-1.05, 1.05)
    ax.set_xlabel("iteration")
    ax.set_ylabel("rank correlation with best fitness")
    ax.set_title(tag)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _finish(fig, path)


def save_compare_figure(path, summaries, ranks: dict) -> None:
    """Mean final fitness with sample-std bars and rank annotations."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    tags = [s.tag for s in summaries]
    means = np.array([s.mean for s in summaries])
    stds = np.array([s.std for s in summaries])
    xs = np.arange(len(tags))
    ax.errorbar(xs, means, yerr=stds, fmt="o", capsize=4)
    for x, s in zip(xs, summaries):
        ax.annotate(f"rank {ranks.get(s.tag, '?')}", (x, s.mean),
                    textcoords="offset points", xytext=(6, 6), fontsize=8)
    if np.all(means - stds > 0.0):
        ax.set_yscale("log")
    ax.set_xticks(xs)
    ax.set_xticklabels(tags, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("final best fitness (mean and std)")
    ax.grid(alpha=0.3)
    _finish(fig, path)
