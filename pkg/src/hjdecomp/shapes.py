"""Implicit surface functions and their pointwise combinators.

A set is encoded by a scalar function: a point belongs to the set iff the
function value there is <= 0.  Surfaces evaluate on a tuple of coordinate
arrays (one entry per ambient dimension, broadcastable), reading only the
dimensions they declare.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import Grid, ScalarField

__all__ = ["ImplicitSurface", "slab", "combine", "sample_on_grid"]


@dataclass(frozen=True)
class ImplicitSurface:
    """Scalar evaluator whose sub-zero level set encodes a set.

    ``dims`` lists the coordinate indices the evaluator reads; it drives
    back-projection bookkeeping and split-legality checks.
    """

    fn: Callable[[Sequence], np.ndarray]
    dims: tuple[int, ...]
    label: str = ""

    def __call__(self, coords: Sequence):
        return self.fn(coords)

    def at(self, point) -> float:
        return float(self.fn(tuple(np.asarray(point, dtype=np.float64))))


def slab(dim: int, center: float, half_width: float) -> ImplicitSurface:
    """|z_dim - center| - half_width: the band of width 2*half_width around center."""
    if dim < 0:
        raise ValueError(f"dimension index must be non-negative, got {dim}")
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    center = float(center)
    half_width = float(half_width)

    def fn(coords):
        return np.abs(np.asarray(coords[dim], dtype=np.float64) - center) - half_width

    return ImplicitSurface(fn, (dim,), label=f"slab(dim={dim}, c={center}, w={half_width})")


def combine(surfaces, mode: str) -> ImplicitSurface:
    """Pointwise set algebra: max for intersection, min for union, negation for complement."""
    surfaces = list(surfaces)
    if not surfaces:
        raise ValueError("combine needs at least one surface")
    if mode == "complement_negate":
        if len(surfaces) != 1:
            raise ValueError(f"complement takes exactly one surface, got {len(surfaces)}")
        s = surfaces[0]
        return ImplicitSurface(lambda coords: -s.fn(coords), s.dims, label=f"not({s.label})")
    if mode == "intersection_max":
        reducer = np.maximum
    elif mode == "union_min":
        reducer = np.minimum
    else:
        raise ValueError(f"unknown combine mode {mode!r}")

    dims = tuple(sorted({d for s in surfaces for d in s.dims}))

    def fn(coords):
        out = surfaces[0].fn(coords)
        for s in surfaces[1:]:
            out = reducer(out, s.fn(coords))
        return out

    return ImplicitSurface(fn, dims, label=f"{mode}({len(surfaces)} surfaces)")


def sample_on_grid(surface: ImplicitSurface, grid: Grid) -> ScalarField:
    """Evaluate a surface at every grid node."""
    if surface.dims and max(surface.dims) >= grid.dim_count:
        raise ValueError(
            f"surface reads dimension {max(surface.dims)} but grid has {grid.dim_count} dimensions"
        )
    values = np.asarray(surface.fn(grid.sparse_coords()), dtype=np.float64)
    values = np.broadcast_to(values, grid.shape).copy()
    field = ScalarField(grid, values)
    field.assert_finite("sampled surface")
    return field
