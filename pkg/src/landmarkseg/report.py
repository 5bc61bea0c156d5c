"""Sweep report emission: delimited records plus rendered trend figures.

The CSV carries one row per record under the header
``scene,strategy,K,repeat,seed,map,wall_seconds,matrix_bytes``; floats are
written with full repr precision so a parse-back reproduces the records
exactly. Figures are matplotlib line charts (one series per strategy,
repeats averaged per K) rendered to SVG with deterministic element ids.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .pipeline import SweepRecord, SweepReport

REPORT_HEADER = ["scene", "strategy", "K", "repeat", "seed", "map", "wall_seconds", "matrix_bytes"]

_SVG_RC = {
    "svg.hashsalt": "landmarkseg",
    "svg.fonttype": "none",
}


def write_report_csv(report: SweepReport, path) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_HEADER)
        for rec in report.records:
            writer.writerow(
                [
                    report.scene_id,
                    rec.strategy,
                    rec.k,
                    rec.repeat,
                    rec.seed,
                    repr(rec.map),
                    repr(rec.wall_seconds),
                    rec.matrix_bytes,
                ]
            )


def read_report_csv(path) -> SweepReport:
    """Parse a report CSV back into records (environment note is not stored)."""
    path = Path(path)
    records: list[SweepRecord] = []
    scene_id = "scene"
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != REPORT_HEADER:
            raise ValueError(f"{path.name} line 1: unexpected report header {header!r}")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(REPORT_HEADER):
                raise ValueError(
                    f"{path.name} line {ln}: expected {len(REPORT_HEADER)} fields, found {len(row)}"
                )
            scene_id = row[0]
            records.append(
                SweepRecord(
                    strategy=row[1],
                    k=int(row[2]),
                    repeat=int(row[3]),
                    seed=int(row[4]),
                    map=float(row[5]),
                    wall_seconds=float(row[6]),
                    matrix_bytes=int(row[7]),
                )
            )
    if not records:
        raise ValueError(f"{path.name}: no records")
    return SweepReport(scene_id=scene_id, records=tuple(records))


def _series(report: SweepReport, value):
    """Per-strategy (ks, means) with repeats averaged at each K."""
    out = {}
    for rec in report.records:
        out.setdefault(rec.strategy, {}).setdefault(rec.k, []).append(value(rec))
    series = {}
    for strategy, by_k in out.items():
        ks = sorted(by_k)
        series[strategy] = (ks, [sum(by_k[k]) / len(by_k[k]) for k in ks])
    return series


def _render(report: SweepReport, path, value, ylabel: str, title: str) -> None:
    series = _series(report, value)
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for strategy in sorted(series):
            ks, means = series[strategy]
            ax.plot(ks, means, marker="o", label=strategy)
        ax.set_xlabel("K (landmarks per block)")
        ax.set_ylabel(ylabel)
        ax.set_title(f"{title} ({report.scene_id})")
        ax.grid(True, alpha=0.3)
        ax.legend()
        if report.environment:
            fig.text(0.01, 0.01, report.environment, fontsize=6, color="gray")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def render_map_figure(report: SweepReport, path) -> None:
    _render(report, path, lambda r: r.map, "mAP", "mAP vs K")


def render_time_figure(report: SweepReport, path) -> None:
    _render(report, path, lambda r: r.wall_seconds, "wall-clock seconds", "time vs K")


def emit_report(
    report: SweepReport,
    csv_path,
    map_figure=None,
    time_figure=None,
) -> None:
    """Write the record CSV and, when paths are given, the two trend figures."""
    write_report_csv(report, csv_path)
    if map_figure is not None:
        render_map_figure(report, map_figure)
    if time_figure is not None:
        render_time_figure(report, time_figure)
