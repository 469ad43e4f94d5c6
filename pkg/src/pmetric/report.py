"""Report rendering: delimited metric tables plus matplotlib figures."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import Plts
from .state_metric import functor_step
from .transport import StateMetric


def write_metric_csv(path, metric: StateMetric):
    """State-by-state distance table as CSV with a header row and column."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["state", *metric.states])
        for i, s in enumerate(metric.states):
            writer.writerow([s, *[f"{v:.12g}" for v in metric.values[i]]])


def write_heatmap(path, metric: StateMetric, title):
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    image = ax.imshow(metric.values, cmap="viridis", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(metric.states)), metric.states, rotation=45, ha="right")
    ax.set_yticks(range(len(metric.states)), metric.states)
    ax.set_title(title)
    fig.colorbar(image, ax=ax, label="distance")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_convergence_plot(path, residuals):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(range(1, len(residuals) + 1), residuals, marker="o")
    if any(r > 0 for r in residuals):
        ax.set_yscale("symlog", linthresh=1e-12)
    ax.set_xlabel("iteration")
    ax.set_ylabel("sup-norm change")
    ax.set_title("fixed-point convergence")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report(model: Plts, out_dir, tol=1e-9, max_iter=None):
    """Run the state metric, write table + figures, return written paths."""
    from .state_metric import default_max_iter

    if max_iter is None:
        max_iter = default_max_iter(model)
    os.makedirs(out_dir, exist_ok=True)
    current = StateMetric.zero(model.states)
    residuals = []
    for _ in range(max_iter):
        nxt = functor_step(model, current)
        residuals.append(float(np.max(np.abs(nxt.values - current.values))))
        current = nxt
        if residuals[-1] < tol:
            break
    paths = {
        "table": os.path.join(out_dir, "state_metric.csv"),
        "heatmap": os.path.join(out_dir, "state_metric.png"),
        "convergence": os.path.join(out_dir, "convergence.png"),
    }
    write_metric_csv(paths["table"], current)
    write_heatmap(paths["heatmap"], current, "state-based bisimilarity metric")
    write_convergence_plot(paths["convergence"], residuals)
    return paths, current, residuals
