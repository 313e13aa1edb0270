"""Render combplan CSV outputs into paper-style figures.

Three figure kinds are supported: the four-panel planning sweep (provisioned
traffic, lightpath count, underprovisioning and wavelength-source count vs
the aggregate requested traffic), the transmit-OSNR curves, and the
cost-vs-laser-share bands. Each render also writes a sidecar CSV holding
exactly the plotted points so correctness can be pinned by golden files
independent of rasterization. Nothing here recomputes physics or planning
quantities; this is display only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

FIGURE_KINDS = ("sweep4", "txosnr", "cost")


class FigureError(Exception):
    pass


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    sidecar: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise FigureError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise FigureError("at least one input CSV is required")

    @property
    def sidecar_path(self) -> str:
        if self.sidecar:
            return self.sidecar
        stem = self.output.rsplit(".", 1)[0]
        return f"{stem}_points.csv"


@dataclass(frozen=True)
class Point:
    panel: str
    series: str
    x: float
    y: float


def read_rows(paths) -> list[dict]:
    rows = []
    for path in paths:
        with open(path, encoding="utf-8") as f:
            lines = [ln for ln in f if not ln.startswith("#")]
        if not lines:
            raise FigureError(f"{path} is empty")
        rows.extend(csv.DictReader(lines))
    if not rows:
        raise FigureError("input CSVs contain no data rows")
    return rows


def _require_columns(rows, columns):
    missing = [c for c in columns if c not in rows[0]]
    if missing:
        raise FigureError(f"input is missing columns: {', '.join(missing)}")


def _fmt(value: float) -> str:
    return format(value, ".10g")


def _series_label_metrics(row) -> str:
    policy = row["policy"]
    if policy == "sws":
        return "sws"
    bits = [policy]
    if row.get("n_lines"):
        bits.append(f"{row['n_lines']}-line")
    if row.get("n_cutoff"):
        bits.append(f"cutoff {row['n_cutoff']}")
    if row.get("penalty_db") and float(row["penalty_db"]) != 0:
        bits.append(f"{row['penalty_db']} dB")
    return " ".join(bits)


_SWEEP_PANELS = (
    ("provisioned_tbps", "Provisioned traffic [Tbit/s]"),
    ("lp_count", "Lightpaths"),
    ("up_ratio", "Underprovisioning ratio"),
    ("ws_count", "Wavelength sources"),
)


def _points_sweep4(rows) -> list[Point]:
    _require_columns(rows, ["policy", "art_tbps", "provisioned_tbps", "lp_count",
                            "up_ratio", "ws_count"])
    points = []
    for row in rows:
        series = _series_label_metrics(row)
        x = float(row["art_tbps"])
        for column, _ in _SWEEP_PANELS:
            points.append(Point(column, series, x, float(row[column])))
    return points


def _points_txosnr(rows) -> list[Point]:
    _require_columns(rows, ["x_variable", "x_value", "architecture", "n_lines",
                            "osnr_tx_db"])
    points = []
    for row in rows:
        arch = row["architecture"]
        series = "sws" if arch == "sws" else f"{arch} {row['n_lines']}-line"
        points.append(Point(row["x_variable"], series,
                            float(row["x_value"]), float(row["osnr_tx_db"])))
    return points


def _points_cost(rows) -> list[Point]:
    _require_columns(rows, ["s", "topology", "n_lines", "penalty_db",
                            "max_block_cost_multiple"])
    points = []
    for row in rows:
        value = row["max_block_cost_multiple"]
        if value == "never_viable":
            continue
        series = f"{row['topology']} {row['n_lines']}-line {row['penalty_db']} dB"
        points.append(Point(row["topology"], series, float(row["s"]), float(value)))
    return points


_POINT_BUILDERS = {"sweep4": _points_sweep4, "txosnr": _points_txosnr,
                   "cost": _points_cost}


def _write_sidecar(path, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["panel", "series", "x", "y"])
        for p in points:
            writer.writerow([p.panel, p.series, _fmt(p.x), _fmt(p.y)])


def _grouped(points, panel):
    series = {}
    for p in points:
        if p.panel == panel:
            series.setdefault(p.series, []).append((p.x, p.y))
    return {name: sorted(vals) for name, vals in sorted(series.items())}


def _draw_sweep4(points, output):
    fig, axes = plt.subplots(2, 2, figsize=(11, 7.5), constrained_layout=True)
    for ax, (panel, ylabel) in zip(axes.flat, _SWEEP_PANELS):
        for name, vals in _grouped(points, panel).items():
            ax.plot([v[0] for v in vals], [v[1] for v in vals],
                    marker="o", markersize=3, label=name)
        if panel == "provisioned_tbps":
            xs = sorted({p.x for p in points})
            ax.plot(xs, xs, linestyle="--", color="grey", linewidth=1,
                    label="requested")
        ax.set_xlabel("Aggregate requested traffic [Tbit/s]")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
    axes.flat[0].legend(fontsize=7)
    fig.savefig(output)
    plt.close(fig)


def _draw_txosnr(points, output):
    panels = sorted({p.panel for p in points})
    fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4.5),
                             constrained_layout=True, squeeze=False)
    labels = {"p_line": "Power per line [dBm]", "ocnr": "OCNR per line [dB]"}
    for ax, panel in zip(axes.flat, panels):
        for name, vals in _grouped(points, panel).items():
            style = {"linestyle": "--", "color": "black"} if name == "sws" else {}
            ax.plot([v[0] for v in vals], [v[1] for v in vals], label=name, **style)
        ax.set_xlabel(labels.get(panel, panel))
        ax.set_ylabel("Transmit OSNR [dB]")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
    fig.savefig(output)
    plt.close(fig)


def _draw_cost(points, output):
    panels = sorted({p.panel for p in points})
    fig, axes = plt.subplots(1, len(panels), figsize=(6 * len(panels), 4.5),
                             constrained_layout=True, squeeze=False)
    for ax, panel in zip(axes.flat, panels):
        series = _grouped(points, panel)
        for name, vals in series.items():
            ax.plot([v[0] for v in vals], [v[1] for v in vals],
                    marker="o", markersize=3, label=name)
        # shaded min/max band per line count across penalties
        groups = {}
        for name, vals in series.items():
            key = name.rsplit(" ", 2)[0]
            groups.setdefault(key, []).append(dict(vals))
        for key, curves in groups.items():
            xs = sorted(set().union(*(set(c) for c in curves)))
            lo = [min(c[x] for c in curves if x in c) for x in xs]
            hi = [max(c[x] for c in curves if x in c) for x in xs]
            ax.fill_between(xs, lo, hi, alpha=0.15)
        ax.set_xlabel("Laser share of transponder cost")
        ax.set_ylabel("Max viable MWS block cost [x SWS laser]")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
    fig.savefig(output)
    plt.close(fig)


_DRAWERS = {"sweep4": _draw_sweep4, "txosnr": _draw_txosnr, "cost": _draw_cost}


def render(spec: FigureSpec) -> tuple[str, str]:
    """Render the figure and its sidecar CSV; returns both paths."""
    rows = read_rows(spec.inputs)
    points = _POINT_BUILDERS[spec.kind](rows)
    if not points:
        raise FigureError("nothing to plot after filtering")
    points = sorted(points, key=lambda p: (p.panel, p.series, p.x))
    _write_sidecar(spec.sidecar_path, points)
    _DRAWERS[spec.kind](points, spec.output)
    return spec.output, spec.sidecar_path
