"""Deterministic report serialization, trajectory CSV export, and figures.

Report JSON is byte-reproducible: keys are sorted, floats are printed with 12
significant digits, and non-finite values become the strings "inf", "-inf",
and "nan".  Figures are rendered with the Agg backend so the CLI works
headless.
"""

from __future__ import annotations

import json
import math
import os
from typing import Iterable

import numpy as np

from .dynamics import Trajectory, WeightFunction, gauss_legendre_nodes


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e15:
        # Keep integral floats readable and stable across platforms.
        return f"{x:.1f}"
    return f"{x:.12g}"


def canonical_json(obj) -> str:
    """Serialize with sorted keys and fixed float formatting."""

    def render(node) -> str:
        if node is None:
            return "null"
        if isinstance(node, (bool, np.bool_)):
            return "true" if node else "false"
        if isinstance(node, (int, np.integer)):
            return str(int(node))
        if isinstance(node, (float, np.floating)):
            return format_float(float(node))
        if isinstance(node, str):
            return json.dumps(node)
        if isinstance(node, dict):
            items = sorted(node.items(), key=lambda kv: kv[0])
            body = ",".join(f"{json.dumps(str(k))}:{render(v)}" for k, v in items)
            return "{" + body + "}"
        if isinstance(node, (list, tuple)):
            return "[" + ",".join(render(v) for v in node) + "]"
        raise TypeError(f"cannot serialize {type(node).__name__}")

    return render(obj)


def write_report(path: str, report: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(canonical_json(report))
        fh.write("\n")


def edge_label(edge) -> str:
    return f"{edge[0]}-{edge[1]}"


def edge_labels(edges: Iterable) -> list:
    return [edge_label(e) for e in edges]


def write_trajectory_csv(path: str, traj: Trajectory, samples: int = 201) -> None:
    """Uniform-grid trajectory export with header t,x_1,...,x_n."""
    ts, states = traj.sample(samples)
    header = "t," + ",".join(f"x_{i + 1}" for i in range(traj.node_count))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for t, row in zip(ts, states):
            fh.write(",".join(f"{val:.12g}" for val in (t, *row)) + "\n")


def utility_per_interval(traj: Trajectory, k: WeightFunction, quad_nodes: int = 32) -> list:
    """Per-interval contributions to the game value (they sum to the total)."""
    out = []
    for data in traj.intervals:
        ts, w = gauss_legendre_nodes(data.start, data.end, quad_nodes)
        out.append(float(np.dot(w, k(ts) * data.drop(ts))))
    return out


def render_figures(out_dir: str, traj: Trajectory, samples: int = 401) -> list:
    """State-trajectory and disagreement-decay figures, returned as file names."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts, states = traj.sample(samples)
    deviations = np.linalg.norm(states - traj.average, axis=1)

    files = []
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for i in range(traj.node_count):
        ax.plot(ts, states[:, i], label=f"$x_{{{i + 1}}}$")
    for b in traj.schedule.breakpoints[1:-1]:
        ax.axvline(b, color="gray", linestyle="--", linewidth=0.8)
    ax.axhline(traj.average, color="black", linestyle=":", linewidth=0.8, label="average")
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Node states under the played schedule")
    fig.tight_layout()
    path = os.path.join(out_dir, "states.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    files.append("states.png")

    fig, ax = plt.subplots(figsize=(7, 4.2))
    positive = np.maximum(deviations, 1e-300)
    ax.semilogy(ts, positive, color="tab:red")
    for b in traj.schedule.breakpoints[1:-1]:
        ax.axvline(b, color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|x(t) - \bar{x}\|_2$")
    ax.set_title("Disagreement decay")
    fig.tight_layout()
    path = os.path.join(out_dir, "disagreement.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    files.append("disagreement.png")
    return files
