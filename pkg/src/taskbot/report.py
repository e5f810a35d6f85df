"""Report rendering: metric JSON, delimited CSV, and matplotlib figures
written side by side in a report directory."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_report(metrics: dict, out_dir, figures: bool = True) -> dict:
    """Write report.json, report.csv, and metric figures; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    json_path = out / "report.json"
    json_path.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    paths["json"] = json_path

    csv_path = out / "report.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for key in sorted(metrics):
            if isinstance(metrics[key], (int, float, str, bool)):
                writer.writerow([key, metrics[key]])
    paths["csv"] = csv_path

    if figures:
        paths.update(_write_figures(metrics, out))
    return paths


def _write_figures(metrics: dict, out: Path) -> dict:
    paths = {}
    scalar = {k: v for k, v in metrics.items()
              if isinstance(v, (int, float)) and not isinstance(v, bool)}
    if scalar:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        keys = sorted(scalar)
        ax.bar(keys, [scalar[k] for k in keys], color="#4878a8")
        ax.set_ylabel("score")
        ax.set_title("evaluation metrics")
        ax.tick_params(axis="x", rotation=30)
        fig.tight_layout()
        path = out / "metrics.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths["metrics_png"] = path

    turns = metrics.get("turn_counts")
    if turns:
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.hist(turns, bins=range(1, max(turns) + 2), color="#a85448",
                edgecolor="white", align="left")
        ax.set_xlabel("turns per dialog")
        ax.set_ylabel("dialogs")
        ax.set_title("turn distribution")
        fig.tight_layout()
        path = out / "turns.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths["turns_png"] = path
    return paths
