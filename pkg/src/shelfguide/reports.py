"""Experiment report output: delimited tables with column names matching
the original result tables, plus rendered accuracy figures."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .simulator.experiments import (
    CorrectionResult,
    DetectionRow,
    ListCreationRow,
    NavigationResult,
)

LIST_COLUMNS = ["Category", "Correct", "Total", "Accuracy"]
DETECTION_COLUMNS = [
    "Distance",
    "Angle (°)",
    "Success (count)",
    "Accuracy",
    "FN (count)",
    "FP (count)",
]
NAVIGATION_COLUMNS = ["Model", "Accuracy 1.5 m", "Accuracy 1 m"]
CORRECTION_COLUMNS = [
    "Model",
    "Top (<4 hops)",
    "Top (>4 hops)",
    "Bottom (<4 hops)",
    "Bottom (>4 hops)",
]


def pct(value: float) -> str:
    return f"{value * 100:.1f}%"


def list_creation_table(rows: Sequence[ListCreationRow]) -> list[list[str]]:
    table = [LIST_COLUMNS]
    for row in rows:
        table.append([row.category, str(row.correct), str(row.total), pct(row.accuracy)])
    return table


def list_creation_figure(rows: Sequence[ListCreationRow], path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [row.category for row in rows]
    ax.bar(range(len(rows)), [row.accuracy * 100 for row in rows], color="#3d6ea5")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=20, ha="right")
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Shopping-list resolution accuracy by category")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def detection_table(rows: Sequence[DetectionRow]) -> list[list[str]]:
    table = [DETECTION_COLUMNS]
    for row in rows:
        table.append(
            [
                f"{row.radius_m:.1f} m",
                f"{row.azimuth_deg:.0f}",
                str(row.successes),
                pct(row.accuracy),
                str(row.false_negatives),
                str(row.false_positives),
            ]
        )
    return table


def navigation_table(results: Sequence[NavigationResult]) -> list[list[str]]:
    table = [NAVIGATION_COLUMNS]
    for res in results:
        table.append([res.reasoner_name, pct(res.accuracy(1.5)), pct(res.accuracy(1.0))])
    return table


def correction_table(results: Sequence[CorrectionResult]) -> list[list[str]]:
    table = [CORRECTION_COLUMNS]
    for res in results:
        table.append(
            [
                res.reasoner_name,
                pct(res.accuracy("top", 1)),
                pct(res.accuracy("top", 2)),
                pct(res.accuracy("bottom", 1)),
                pct(res.accuracy("bottom", 2)),
            ]
        )
    return table


def write_csv(table: list[list[str]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(table)
    return path


def detection_figure(rows: Sequence[DetectionRow], path: str | Path) -> Path:
    """Accuracy per pose: grouped bars by distance, one bar per angle."""
    path = Path(path)
    distances = sorted({row.radius_m for row in rows})
    angles = sorted({row.azimuth_deg for row in rows})
    lookup = {(row.radius_m, row.azimuth_deg): row.accuracy for row in rows}

    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(angles)
    for i, angle in enumerate(angles):
        xs, ys = [], []
        for j, dist in enumerate(distances):
            if (dist, angle) in lookup:
                xs.append(j + (i - (len(angles) - 1) / 2) * width)
                ys.append(lookup[(dist, angle)] * 100)
        ax.bar(xs, ys, width=width, label=f"{angle:.0f}°")
    ax.set_xticks(range(len(distances)))
    ax.set_xticklabels([f"{d:.1f} m" for d in distances])
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Product detection accuracy by camera pose")
    ax.legend(title="Azimuth")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def navigation_figure(results: Sequence[NavigationResult], path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [res.reasoner_name for res in results]
    x = range(len(names))
    far = [res.accuracy(1.5) * 100 for res in results]
    near = [res.accuracy(1.0) * 100 for res in results]
    ax.bar([i - 0.2 for i in x], far, width=0.4, label="1.5 m")
    ax.bar([i + 0.2 for i in x], near, width=0.4, label="1.0 m")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Navigation zone accuracy by distance")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def correction_figure(results: Sequence[CorrectionResult], path: str | Path) -> Path:
    path = Path(path)
    conditions = [("top", 1), ("top", 2), ("bottom", 1), ("bottom", 2)]
    labels = ["Top ≤4", "Top >4", "Bottom ≤4", "Bottom >4"]
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / max(len(results), 1)
    for i, res in enumerate(results):
        xs = [j + (i - (len(results) - 1) / 2) * width for j in range(len(conditions))]
        ys = [res.accuracy(cfg, phase) * 100 for cfg, phase in conditions]
        ax.bar(xs, ys, width=width, label=res.reasoner_name)
    ax.set_xticks(range(len(conditions)))
    ax.set_xticklabels(labels)
    ax.set_ylabel("Accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title("Correction accuracy by shelf region and error size")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def summary_lines(
    detection: Sequence[DetectionRow] | None,
    navigation: Sequence[NavigationResult] | None,
    correction: Sequence[CorrectionResult] | None,
    list_creation: Sequence[ListCreationRow] | None = None,
) -> list[str]:
    lines = []
    if list_creation:
        lines.append("Shopping-list creation (single-typo queries):")
        for row in list_creation:
            lines.append(
                f"  {row.category}: {row.correct}/{row.total} ({pct(row.accuracy)})"
            )
    if detection:
        lines.append("Product detection (per pose):")
        for row in detection:
            lines.append(
                f"  {row.radius_m:.1f} m @ {row.azimuth_deg:>3.0f}°: "
                f"{row.successes}/{row.trials} ({pct(row.accuracy)}), "
                f"FN {row.false_negatives}, FP {row.false_positives}"
            )
    if navigation:
        lines.append("Navigation (zone descriptors):")
        for res in navigation:
            lines.append(
                f"  {res.reasoner_name}: 1.5 m {pct(res.accuracy(1.5))}, "
                f"1.0 m {pct(res.accuracy(1.0))}"
            )
    if correction:
        lines.append("Correction (hop feedback):")
        for res in correction:
            lines.append(
                f"  {res.reasoner_name}: top {pct(res.accuracy('top', 1))}/"
                f"{pct(res.accuracy('top', 2))}, bottom {pct(res.accuracy('bottom', 1))}/"
                f"{pct(res.accuracy('bottom', 2))} (≤4 hops / >4 hops)"
            )
    return lines
