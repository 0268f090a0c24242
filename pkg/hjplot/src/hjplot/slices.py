"""2-d contour slices of value-function files.

A slice fixes all but two dimensions at given coordinates (snapped to the
nearest node) and renders the filled sub-level region of the remaining
plane, with the zero-level (or custom-level) contour drawn on top.  An
optional overlay field is drawn as an outline for full-vs-approximation
comparisons, and the contour vertices can be exported as CSV for tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .hjvf import FieldFile, read_field_file


@dataclass(frozen=True)
class SliceSpec:
    """Fixed dimensions with coordinates, two free dimensions, contour level."""

    fixed: dict
    free: tuple[int, int]
    level: float = 0.0

    def validate(self, dim_count: int) -> None:
        if len(self.free) != 2:
            raise ValueError("a slice needs exactly two free dimensions")
        claimed = sorted(list(self.fixed) + list(self.free))
        if claimed != list(range(dim_count)):
            raise ValueError(
                f"fixed {sorted(self.fixed)} + free {list(self.free)} must partition "
                f"the {dim_count} field dimensions"
            )


def extract_slice(field: FieldFile, spec: SliceSpec):
    """(x axis, y axis, 2-d values, snapped coordinates) for one slice."""
    spec.validate(field.grid.dim_count)
    index: list = [slice(None)] * field.grid.dim_count
    snapped = {}
    for dim, value in spec.fixed.items():
        lo, hi = field.grid.mins[dim], field.grid.maxs[dim]
        if not lo <= value <= hi:
            raise ValueError(f"slice value {value} outside grid range [{lo}, {hi}] in dim {dim}")
        axis = field.grid.axis(dim)
        node = int(np.argmin(np.abs(axis - value)))
        index[dim] = node
        snapped[dim] = float(axis[node])
    plane = field.values[tuple(index)]
    d0, d1 = spec.free
    # indexing drops fixed axes, leaving the free axes in increasing order
    if d0 > d1:
        plane = plane.T
    xs = field.grid.axis(d0)
    ys = field.grid.axis(d1)
    return xs, ys, plane, snapped


def contour_vertices(xs, ys, plane, level=0.0):
    """Polyline vertices of the level contour, one (n, 2) array per segment."""
    fig = plt.figure()
    try:
        cs = plt.contour(xs, ys, plane.T, levels=[level])
        segs = [np.asarray(seg) for seg in cs.allsegs[0]]
    finally:
        plt.close(fig)
    return segs


def write_vertices_csv(segments, path) -> None:
    lines = ["segment,x,y"]
    for k, seg in enumerate(segments):
        for x, y in seg:
            lines.append(f"{k},{float(x)!r},{float(y)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def plot_slice(
    field_path,
    spec: SliceSpec,
    out_path,
    overlay_path=None,
    vertices_csv=None,
) -> dict:
    """Render one slice to a PNG; returns a small summary for callers."""
    field = read_field_file(field_path)
    xs, ys, plane, snapped = extract_slice(field, spec)

    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    empty = bool(np.all(plane > spec.level))
    if not empty:
        ax.contourf(
            xs, ys, plane.T, levels=[-np.inf, spec.level], colors=["#2a9d8f"], alpha=0.6
        )
        ax.contour(xs, ys, plane.T, levels=[spec.level], colors="#1d6e66", linewidths=1.6)
    else:
        ax.text(0.5, 0.5, "empty set", transform=ax.transAxes,
                ha="center", va="center", fontsize=14, color="#888888")

    overlay_empty = None
    if overlay_path is not None:
        overlay = read_field_file(overlay_path)
        oxs, oys, oplane, _ = extract_slice(overlay, spec)
        overlay_empty = bool(np.all(oplane > spec.level))
        if not overlay_empty:
            ax.contour(oxs, oys, oplane.T, levels=[spec.level], colors="#e76f51",
                       linewidths=1.6, linestyles="--")

    d0, d1 = spec.free
    ax.set_xlabel(f"x{d0}")
    ax.set_ylabel(f"x{d1}")
    fixed_text = ", ".join(f"x{k}={snapped[k]:.3g}" for k in sorted(snapped))
    ax.set_title(f"level {spec.level:g} set slice ({fixed_text})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)

    segments = [] if empty else contour_vertices(xs, ys, plane, spec.level)
    if vertices_csv is not None:
        write_vertices_csv(segments, vertices_csv)
    return {
        "empty": empty,
        "overlay_empty": overlay_empty,
        "snapped": snapped,
        "segments": segments,
    }
