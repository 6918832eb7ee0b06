"""Render the figure CSVs emitted by the acsusy CLI to raster images.

A read-only consumer of the CSV contract: one header row, numeric
columns, schemas fixed per figure id.  Figures 1 and 2 are two-curve
overlays (first source in blue, second in green); figure 3 draws one
curve per beta column.  Rendering does no physics: identical CSVs with
a fixed STYLE_VERSION produce pixel-identical images.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE_VERSION = 1
DPI = 150
FIGSIZE = (6.4, 4.2)

# exact column schemas; figure 3 has one density column per beta
FIXED_SCHEMAS = {
    1: ["z", "phi_sq_ring", "phi_sq_disk"],
    2: ["z", "phi_sq_plane", "phi_sq_slabgap"],
}
FIG3_AXIS = "r_over_r0"
FIG3_PREFIX = "phi_sq_beta_"

CURVE_STYLES = {
    "phi_sq_ring": dict(color="tab:blue", label="ring"),
    "phi_sq_disk": dict(color="tab:green", label="disk"),
    "phi_sq_plane": dict(color="tab:blue", label="plane"),
    "phi_sq_slabgap": dict(color="tab:green", label="volume with gap"),
}

AXIS_LABELS = {
    1: ("z", r"$|\phi|^2$"),
    2: ("z", r"$|\phi|^2$"),
    3: (r"$r/r_0$", r"$|\phi|^2$"),
}


class SchemaError(ValueError):
    """CSV columns do not match the figure schema."""


@dataclass
class RenderSpec:
    """One rendering job: which CSV, which figure, where to write."""

    csv_path: str
    figure_id: int
    out_path: str
    styles: dict = field(default_factory=dict)


def read_series(csv_path: str):
    """Read a figure CSV: returns (column names, float array of shape
    (rows, columns)).  Raises SchemaError on structural problems."""
    path = Path(csv_path)
    if not path.exists():
        raise SchemaError(f"no such CSV: {csv_path}")
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{csv_path} is empty: no header row")
        rows = [row for row in reader if row]
    if not rows:
        raise SchemaError(f"{csv_path} has a header but no data rows")
    try:
        data = np.array([[float(v) for v in row] for row in rows])
    except ValueError as exc:
        raise SchemaError(f"{csv_path} has non-numeric data: {exc}")
    if data.shape[1] != len(header):
        raise SchemaError(
            f"{csv_path}: {data.shape[1]} data columns vs {len(header)} header names")
    return header, data


def validate_schema(figure_id: int, columns: list) -> None:
    """Check the column names against the figure id, naming any
    missing or unexpected column."""
    if figure_id in FIXED_SCHEMAS:
        expected = FIXED_SCHEMAS[figure_id]
        missing = [c for c in expected if c not in columns]
        extra = [c for c in columns if c not in expected]
        if missing or extra:
            raise SchemaError(
                f"figure {figure_id} expects columns {expected}; "
                f"missing {missing or 'none'}, unexpected {extra or 'none'}")
        if columns != expected:
            raise SchemaError(
                f"figure {figure_id} expects column order {expected}, got {columns}")
        return
    if figure_id == 3:
        if not columns or columns[0] != FIG3_AXIS:
            raise SchemaError(
                f"figure 3 expects first column {FIG3_AXIS!r}, got "
                f"{columns[0] if columns else 'nothing'}")
        bad = [c for c in columns[1:] if not c.startswith(FIG3_PREFIX)]
        if bad:
            raise SchemaError(
                f"figure 3 expects {FIG3_PREFIX}* density columns, unexpected {bad}")
        if len(columns) < 2:
            raise SchemaError("figure 3 needs at least one density column")
        return
    raise SchemaError(f"unknown figure id {figure_id}; expected 1, 2 or 3")


def build_figure(spec: RenderSpec):
    """Validate the CSV and build the matplotlib figure (not yet saved)."""
    columns, data = read_series(spec.csv_path)
    validate_schema(spec.figure_id, columns)
    x = data[:, 0]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for i, name in enumerate(columns[1:], start=1):
        if spec.figure_id == 3:
            style = dict(label=rf"$\beta r_0^2 = {name[len(FIG3_PREFIX):]}$")
        else:
            style = dict(CURVE_STYLES[name])
        style.update(spec.styles.get(name, {}))
        ax.plot(x, data[:, i], linewidth=1.6, **style)
    xlabel, ylabel = AXIS_LABELS[spec.figure_id]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(frameon=False)
    ax.margins(x=0.0)
    ax.set_ylim(bottom=0.0)
    fig.tight_layout()
    return fig


def render(spec: RenderSpec) -> str:
    """Write the image; returns the output path.

    The PNG metadata is stripped of the mutable Software tag so identical
    CSVs yield byte-identical files for a fixed style version.
    """
    fig = build_figure(spec)
    try:
        fig.savefig(spec.out_path, dpi=DPI, metadata={"Software": None})
    finally:
        plt.close(fig)
    return spec.out_path
