"""Render scaling CSVs into log2-log2 figures with fitted-slope labels.

Input is the delimited scaling output with header
``experiment_name,delta,rho,n_strips,lambda,value,stderr``; nothing else
is shared with the producer.  One figure per experiment group.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__version__ = "0.1.0"


class MissingColumns(ValueError):
    """The CSV lacks a required column."""


class EmptyGroups(ValueError):
    """The CSV has no data rows to group."""


@dataclass
class PlotSpec:
    input_csv: Path
    output: Path
    x_column: str = "delta"
    y_column: str = "value"
    group_by: str = "experiment_name"


@dataclass
class RenderedFigure:
    group: str
    path: Path
    slope: float
    n_rows: int


def ols_slope(x, y) -> float:
    """Plain least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        return math.nan
    return float(xc @ (y - y.mean())) / sxx


def _read_groups(spec: PlotSpec) -> dict[str, list[dict]]:
    with open(spec.input_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        needed = (spec.group_by, spec.x_column, spec.y_column)
        missing = [c for c in needed if c not in header]
        if missing:
            raise MissingColumns(f"missing columns: {', '.join(missing)}")
        groups: dict[str, list[dict]] = {}
        for row in reader:
            groups.setdefault(row[spec.group_by], []).append(row)
    if not groups:
        raise EmptyGroups(f"no data rows in {spec.input_csv}")
    return groups


def _usable(rows: list[dict], spec: PlotSpec) -> tuple[np.ndarray, np.ndarray]:
    """Rows entering the fit: positive value, relative stderr <= 0.1."""
    xs, ys = [], []
    for row in rows:
        x = float(row[spec.x_column])
        y = float(row[spec.y_column])
        se = float(row.get("stderr") or 0.0)
        if x > 0 and y > 0 and se / y <= 0.1:
            xs.append(math.log2(x))
            ys.append(math.log2(y))
    return np.array(xs), np.array(ys)


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", name).strip("-") or "group"


def render_scaling(spec: PlotSpec) -> list[RenderedFigure]:
    """One log2-log2 scatter per group, with the least-squares line and its
    slope printed on the figure.  Output bytes are deterministic for a
    fixed input."""
    groups = _read_groups(spec)
    out_dir = Path(spec.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    rendered = []
    for name in sorted(groups):
        rows = groups[name]
        xs, ys = _usable(rows, spec)
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.scatter(xs, ys, color="tab:blue", zorder=3)
        slope = math.nan
        if len(xs) >= 3:
            slope = ols_slope(xs, ys)
            grid = np.linspace(xs.min(), xs.max(), 2)
            line = ys.mean() + slope * (grid - xs.mean())
            ax.plot(grid, line, color="tab:red", zorder=2)
        label = "slope = n/a" if math.isnan(slope) else f"slope = {slope:.6f}"
        ax.text(0.03, 0.95, label, transform=ax.transAxes, va="top")
        ax.set_xlabel(f"log2 {spec.x_column}")
        ax.set_ylabel(f"log2 {spec.y_column}")
        ax.set_title(name)
        fig.tight_layout()
        path = out_dir / f"{_slug(name)}.png"
        fig.savefig(path, dpi=100, metadata={"Software": "regulab-plots"})
        plt.close(fig)
        rendered.append(RenderedFigure(name, path, slope, len(rows)))
    return rendered
