"""Static figures for solve and rounds reports (Agg backend, files only)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .graph import ZERO, Instance  # noqa: E402


def plot_arc_loads(inst: Instance, x, flow, bound, path, title="arc loads"):
    """Per arc: fractional flow, unsplittable flow, the ``x + bound`` limit and capacity."""
    ids = [a.id for a in inst.arcs]
    pos = range(len(ids))
    xs = [float(x.get(a, ZERO)) for a in ids]
    fs = [float(flow.get(a, ZERO)) for a in ids]
    lim = [v + float(bound) for v in xs]
    cap = [float(a.capacity) for a in inst.arcs]
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(ids) + 2), 4))
    w = 0.4
    ax.bar([p - w / 2 for p in pos], xs, w, label="fractional x")
    ax.bar([p + w / 2 for p in pos], fs, w, label="unsplittable")
    ax.scatter(list(pos), lim, marker="_", s=200, color="red", label="x + bound (open)")
    ax.scatter(list(pos), cap, marker="x", color="black", label="capacity")
    ax.set_xticks(list(pos))
    ax.set_xticklabels([str(a) for a in ids], rotation=90, fontsize=7)
    ax.set_ylabel("flow")
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_round_loads(inst: Instance, rounds, path, title="load / capacity per round"):
    """Heat map of flow/capacity with arcs as rows and rounds as columns."""
    ids = [a.id for a in inst.arcs]
    grid = []
    for a in inst.arcs:
        row = []
        for _, sol in rounds:
            f = sol.flow().get(a.id, ZERO)
            row.append(float(f / a.capacity) if a.capacity else (0.0 if not f else float("nan")))
        grid.append(row)
    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(rounds) + 3), max(3, 0.25 * len(ids) + 1)))
    im = ax.imshow(grid or [[0.0]], aspect="auto", vmin=0, vmax=1, cmap="viridis")
    ax.set_xlabel("round")
    ax.set_yticks(range(len(ids)))
    ax.set_yticklabels([str(a) for a in ids], fontsize=7)
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
