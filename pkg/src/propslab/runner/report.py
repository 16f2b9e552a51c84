"""Recompute experiment tables and curves from the records on disk."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..errors import NoRecords
from ..search import RunRecord
from .experiment import MANIFEST, MetricsRow, metrics_for

TABLE_HEADER = ("row", "target", "mode", "provider", "trials", "done", "best_f (mean ± std)", "stderr", "s/trial")


@dataclass
class Summary:
    metrics: List[MetricsRow]
    table: str
    csv_path: Path
    curve_paths: List[Path]
    figure_paths: List[Path]


def record_paths(directory) -> List[Path]:
    return sorted(p for p in Path(directory).rglob("*.jsonl") if not p.name.endswith(".transcript.jsonl"))


def load_records(directory) -> Dict[str, List[RunRecord]]:
    """Records grouped by row (the directory each record lives in)."""
    directory = Path(directory)
    groups: Dict[str, List[RunRecord]] = {}
    for path in record_paths(directory):
        rel = path.parent.relative_to(directory)
        row = str(rel) if str(rel) != "." else f"{path.stem.rsplit('-', 1)[0]}"
        groups.setdefault(row, []).append(RunRecord.load(path))
    return groups


def _planned(directory: Path) -> Dict[str, dict]:
    manifest = directory / MANIFEST
    if not manifest.exists():
        return {}
    return {r["row"]: r for r in json.loads(manifest.read_text())["rows"]}


def compute_metrics(directory) -> List[MetricsRow]:
    directory = Path(directory)
    groups = load_records(directory)
    if not groups:
        raise NoRecords(f"no run records under {directory}")
    planned = _planned(directory)
    rows = []
    for name in sorted(groups):
        recs = groups[name]
        first = recs[0]
        info = planned.get(name, {})
        trials = info.get("trials", len(recs))
        provider = info.get("provider", first.config.provider.kind)
        rows.append(metrics_for(name, first.target, first.config.mode, provider, max(trials, len(recs)), recs))
    return rows


def format_table(metrics: List[MetricsRow]) -> str:
    body = [
        (m.row, m.target, m.mode, m.provider, str(m.trials), str(m.completed), m.cell(),
         f"{m.stderr:.2f}", f"{m.wall_time:.1f}")
        for m in metrics
    ]
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(TABLE_HEADER)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(TABLE_HEADER, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in body]
    if any(m.flagged for m in metrics):
        lines.append("* fewer completed trials than planned")
    return "\n".join(lines) + "\n"


def write_csv(metrics: List[MetricsRow], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "target", "mode", "provider", "trials", "completed", "mean", "std", "stderr",
                    "wall_time", "cell", "flagged"])
        for m in metrics:
            w.writerow([m.row, m.target, m.mode, m.provider, m.trials, m.completed, repr(m.mean), repr(m.std),
                        repr(m.stderr), f"{m.wall_time:.3f}", m.cell(), int(m.flagged)])


def curve_matrix(records: List[RunRecord]) -> np.ndarray:
    """Best-so-far per evaluation, one row per trial, padded with each trial's last value."""
    curves = [r.best_so_far() for r in records if r.steps]
    length = max(len(c) for c in curves)
    out = np.empty((len(curves), length))
    for i, c in enumerate(curves):
        out[i, :len(c)] = c
        out[i, len(c):] = c[-1]
    return out


def write_curves(groups: Dict[str, List[RunRecord]], directory: Path) -> List[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, recs in sorted(groups.items()):
        if not any(r.steps for r in recs):
            continue
        mat = curve_matrix(recs)
        path = directory / f"{name.replace('/', '_')}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["evaluation", "mean", "std"] + [f"trial_{i}" for i in range(mat.shape[0])])
            std = mat.std(axis=0, ddof=1) if mat.shape[0] > 1 else np.zeros(mat.shape[1])
            for j in range(mat.shape[1]):
                w.writerow([j + 1, repr(float(mat[:, j].mean())), repr(float(std[j]))]
                           + [repr(float(v)) for v in mat[:, j]])
        paths.append(path)
    return paths


def write_figures(groups: Dict[str, List[RunRecord]], directory: Path) -> List[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    overview, ax_all = plt.subplots(figsize=(7, 4.5))
    for name, recs in sorted(groups.items()):
        if not any(r.steps for r in recs):
            continue
        mat = curve_matrix(recs)
        x = np.arange(1, mat.shape[1] + 1)
        mean = mat.mean(axis=0)
        std = mat.std(axis=0, ddof=1) if mat.shape[0] > 1 else np.zeros_like(mean)
        fig, ax = plt.subplots(figsize=(6, 4))
        for row in mat:
            ax.plot(x, row, color="0.75", linewidth=0.6)
        ax.plot(x, mean, color="C0", linewidth=1.8, label=f"mean of {mat.shape[0]} trials")
        ax.fill_between(x, mean - std, mean + std, color="C0", alpha=0.2, label="± 1 std")
        ax.set_xlabel("evaluation")
        ax.set_ylabel("best f so far")
        ax.set_title(name)
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        path = directory / f"{name.replace('/', '_')}.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        paths.append(path)
        ax_all.plot(x, mean, label=name)
    if paths:
        ax_all.set_xlabel("evaluation")
        ax_all.set_ylabel("mean best f so far")
        ax_all.legend(loc="best", fontsize=7)
        overview.tight_layout()
        path = directory / "overview.png"
        overview.savefig(path, dpi=110)
        paths.append(path)
    plt.close(overview)
    return paths


def summarize(directory, figures: bool = True, out_dir: Optional[Path] = None) -> Summary:
    """Aggregate every record under ``directory`` into a table, CSV, curves and (optionally) PNGs.

    Only persisted records are read, so the output is a pure function of the directory contents.
    """
    directory = Path(directory)
    metrics = compute_metrics(directory)
    out_dir = Path(out_dir) if out_dir is not None else directory / "summary"
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "metrics.csv"
    write_csv(metrics, csv_path)
    table = format_table(metrics)
    (out_dir / "metrics.txt").write_text(table, encoding="utf-8")
    groups = load_records(directory)
    curve_paths = write_curves(groups, out_dir / "curves")
    figure_paths = write_figures(groups, out_dir / "figures") if figures else []
    return Summary(metrics, table, csv_path, curve_paths, figure_paths)
