"""Figure rendering for sweep results (headless matplotlib)."""

from __future__ import annotations

import math
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sweep import SweepResult

__all__ = ["render_report"]


def _group(cells, key):
    groups = defaultdict(list)
    for c in cells:
        groups[key(c)].append(c)
    return groups


def _plot_lines(ax, cells, x_of, label_of, y="rate"):
    for label, group in sorted(_group(cells, label_of).items()):
        group = sorted(group, key=x_of)
        xs = [x_of(c) for c in group]
        if y == "rate":
            ys = [c.mean_sum_rate_nats for c in group]
            errs = [c.stderr_nats for c in group]
            ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=2, label=label)
        else:
            ys = [c.mean_feedback_bits for c in group]
            ax.plot(xs, ys, marker="s", label=label)


def _maybe_ropt(ax, cells, x_of, group_of):
    seen = set()
    for c in sorted(cells, key=x_of):
        if not math.isnan(c.mean_ropt_nats):
            seen.add(group_of(c))
    for g in sorted(seen):
        pts = sorted(
            {
                (x_of(c), c.mean_ropt_nats)
                for c in cells
                if group_of(c) == g and not math.isnan(c.mean_ropt_nats)
            }
        )
        if pts:
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                linestyle="--",
                color="black",
                alpha=0.6,
                label=f"optimum ({g})",
            )


def render_report(result: SweepResult, out_dir) -> list:
    """Render summary figures next to the delimited output; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    cells = result.cells
    paths = []

    fig, ax = plt.subplots(figsize=(7, 5))
    _plot_lines(ax, cells, x_of=lambda c: c.N, label_of=lambda c: f"{c.scheme}, P={c.P:g}")
    _maybe_ropt(ax, cells, x_of=lambda c: c.N, group_of=lambda c: f"P={c.P:g}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("number of users N")
    ax.set_ylabel("mean sum rate [nats]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    p = os.path.join(out_dir, "rate_vs_n.png")
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 5))
    _plot_lines(ax, cells, x_of=lambda c: c.P, label_of=lambda c: f"{c.scheme}, N={c.N}")
    _maybe_ropt(ax, cells, x_of=lambda c: c.P, group_of=lambda c: f"N={c.N}")
    ax.set_xscale("log")
    ax.set_xlabel("total power P")
    ax.set_ylabel("mean sum rate [nats]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    p = os.path.join(out_dir, "rate_vs_p.png")
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7, 5))
    _plot_lines(
        ax, cells, x_of=lambda c: c.N,
        label_of=lambda c: f"{c.scheme}, P={c.P:g}", y="bits",
    )
    ax.set_xscale("log", base=2)
    ax.set_yscale("symlog")
    ax.set_xlabel("number of users N")
    ax.set_ylabel("mean feedback [bits]")
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    p = os.path.join(out_dir, "feedback_vs_n.png")
    fig.savefig(p, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(p)
    return paths
