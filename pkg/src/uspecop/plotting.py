"""Figures for exploration reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def plot_trace_counts(rows: Sequence[dict], path: Path, title: str = "") -> Path:
    """Emitted (and, when known, oracle) trace counts against t."""
    ts = [r["t"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(ts, [r["model_traces"] for r in rows], marker="o", label="model")
    oracle = [r.get("oracle_traces") for r in rows]
    if all(v is not None and v != "" for v in oracle):
        ax.plot(ts, oracle, marker="x", linestyle="--", label="oracle")
    ax.set_xlabel("t")
    ax.set_ylabel("traces")
    ax.set_xticks(ts)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path


def plot_pruning(rows: Sequence[dict], path: Path, title: str = "") -> Path:
    """Pruned branches by cause, plus peak window and monitor counts."""
    ts = [r["t"] for r in rows]
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.2))
    w = 0.35
    a1.bar([t - w / 2 for t in ts], [r["pruned_by_monitor"] for r in rows], w, label="monitor")
    a1.bar([t + w / 2 for t in ts], [r["pruned_by_t"] for r in rows], w, label="t-bound")
    a1.set_xlabel("t")
    a1.set_ylabel("pruned branches")
    a1.set_xticks(ts)
    a1.legend()
    a2.plot(ts, [r["peak_in_progress"] for r in rows], marker="o", label="peak in-progress")
    a2.plot(ts, [r["peak_monitors"] for r in rows], marker="s", label="peak monitors")
    a2.set_xlabel("t")
    a2.set_xticks(ts)
    a2.legend()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)
    return path
