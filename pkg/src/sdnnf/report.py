"""Reporting: per-node width profiles and per-stage width towers, written as
CSV next to a rendered matplotlib figure."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .circuit import AND, LIT, OR, TRUE, FALSE, StructuredCircuit  # noqa: E402


def width_profile(circuit: StructuredCircuit) -> list[dict]:
    """Per vtree node: OR, AND, and input gate counts."""
    rows = []
    for node in range(circuit.vtree.num_nodes):
        ors = ands = inputs = 0
        for g in circuit.gates_at(node):
            kind = circuit.kinds[g]
            if kind == OR:
                ors += 1
            elif kind == AND:
                ands += 1
            else:
                inputs += 1
        rows.append({"node": node, "or_gates": ors, "and_gates": ands,
                     "inputs": inputs})
    return rows


def write_width_profile(circuit: StructuredCircuit, out_dir: str,
                        basename: str = "width_profile") -> tuple[str, str]:
    """Write ``<basename>.csv`` and ``<basename>.png``; returns both paths."""
    os.makedirs(out_dir, exist_ok=True)
    rows = width_profile(circuit)
    csv_path = os.path.join(out_dir, basename + ".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["node", "or_gates",
                                                "and_gates", "inputs"])
        writer.writeheader()
        writer.writerows(rows)

    fig, ax = plt.subplots(figsize=(8, 3.2))
    nodes = [r["node"] for r in rows]
    ax.bar(nodes, [r["or_gates"] for r in rows], label="OR gates",
           color="#1f6fb2")
    ax.bar(nodes, [r["and_gates"] for r in rows],
           bottom=[r["or_gates"] for r in rows], label="AND gates",
           color="#76b0d8")
    ax.set_xlabel("vtree node")
    ax.set_ylabel("gates")
    ax.set_title("gate profile (width = max OR count = %d)"
                 % max((r["or_gates"] for r in rows), default=0))
    ax.legend(frameon=False)
    fig.tight_layout()
    png_path = os.path.join(out_dir, basename + ".png")
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return csv_path, png_path


def write_stage_widths(stage_names, stage_widths, out_dir: str,
                       basename: str = "stage_widths") -> tuple[str, str]:
    """Write the per-stage width tower of a quantifier-elimination run."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, basename + ".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "name", "width"])
        for i, (name, w) in enumerate(zip(stage_names, stage_widths)):
            writer.writerow([i, name, w])

    fig, ax = plt.subplots(figsize=(6, 3.2))
    xs = range(len(stage_widths))
    ax.plot(xs, [max(w, 1) for w in stage_widths], marker="o",
            color="#1f6fb2")
    ax.set_yscale("log", base=2)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(stage_names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("width")
    ax.set_title("width per quantifier-elimination stage")
    fig.tight_layout()
    png_path = os.path.join(out_dir, basename + ".png")
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return csv_path, png_path
