"""Matplotlib figures for the report commands; everything renders to files."""

from __future__ import annotations

from collections import Counter
from typing import Dict, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_series(lengths: Sequence[int], series: Mapping[str, Sequence[Optional[int]]], path: str,
                title: str = "", ylabel: str = "backtracking run size", logy: bool = True) -> str:
    """One line per named series; ``None`` entries (budget hit) are skipped."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, ys in series.items():
        pts = [(n, y) for n, y in zip(lengths, ys) if y is not None]
        if pts:
            xs, vs = zip(*pts)
            ax.plot(xs, vs, marker="o", label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_verdicts(verdicts: Sequence[str], path: str, title: str = "corpus verdicts") -> str:
    counts = Counter(verdicts)
    labels = sorted(counts, key=lambda v: (v != "Exponential", v))
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(range(len(labels)), [counts[v] for v in labels], color="tab:blue")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("expressions")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
