"""Rectangular node-centered grids and first-order one-sided differences.

Non-periodic dimensions include both endpoints, so the spacing is
(max - min)/(n - 1).  Periodic dimensions identify max with min and exclude
the upper endpoint, so the spacing is (max - min)/n and node n-1 neighbors
node 0.  Node values are stored row-major (C order) with the last dimension
varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "make_grid",
    "state_of_index",
    "one_sided_diff",
    "cell_volume",
]


@dataclass(frozen=True)
class Grid:
    """Immutable node-centered discretization of a coordinate box."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    counts: tuple[int, ...]
    periodic: tuple[bool, ...]

    @property
    def dim_count(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @property
    def total_nodes(self) -> int:
        return int(np.prod(self.counts))

    @property
    def spacings(self) -> tuple[float, ...]:
        out = []
        for lo, hi, n, per in zip(self.mins, self.maxs, self.counts, self.periodic):
            out.append((hi - lo) / n if per else (hi - lo) / (n - 1))
        return tuple(out)

    def axis(self, dim: int) -> np.ndarray:
        """Node coordinates along one dimension: min + i * spacing."""
        dx = self.spacings[dim]
        return self.mins[dim] + dx * np.arange(self.counts[dim], dtype=np.float64)

    def axes(self) -> list[np.ndarray]:
        return [self.axis(k) for k in range(self.dim_count)]

    def sparse_coords(self) -> list[np.ndarray]:
        """Axis arrays reshaped for broadcasting over the full node array."""
        coords = []
        for k in range(self.dim_count):
            shape = [1] * self.dim_count
            shape[k] = self.counts[k]
            coords.append(self.axis(k).reshape(shape))
        return coords

    def flat_index(self, multi_index) -> int:
        return int(np.ravel_multi_index(tuple(multi_index), self.counts))

    def multi_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.counts))

    def strides(self) -> np.ndarray:
        """Flat-index stride of each dimension (C order, int64)."""
        s = np.ones(self.dim_count, dtype=np.int64)
        for k in range(self.dim_count - 2, -1, -1):
            s[k] = s[k + 1] * self.counts[k + 1]
        return s

    def same_discretization(self, other: "Grid") -> bool:
        return (
            self.mins == other.mins
            and self.maxs == other.maxs
            and self.counts == other.counts
            and self.periodic == other.periodic
        )


@dataclass(frozen=True)
class ScalarField:
    """One value per grid node, shaped like ``grid.shape``."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if self.values.dtype != np.float64:
            object.__setattr__(self, "values", self.values.astype(np.float64))

    def assert_finite(self, context: str = "field") -> None:
        if not np.isfinite(self.values).all():
            raise ValueError(f"{context} contains non-finite values")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def make_grid(mins, maxs, counts, periodic) -> Grid:
    """Build a grid, validating extents and node counts."""
    mins = tuple(float(x) for x in mins)
    maxs = tuple(float(x) for x in maxs)
    counts = tuple(int(n) for n in counts)
    periodic = tuple(bool(p) for p in periodic)
    if not (len(mins) == len(maxs) == len(counts) == len(periodic)):
        raise ValueError("dimension mismatch: mins, maxs, counts, periodic must have equal length")
    if len(mins) == 0:
        raise ValueError("grid needs at least one dimension")
    for k, (lo, hi, n) in enumerate(zip(mins, maxs, counts)):
        if not hi > lo:
            raise ValueError(f"non-positive extent in dimension {k}: [{lo}, {hi}]")
        if n < 2:
            raise ValueError(f"node count must be at least 2, got {n} in dimension {k}")
    return Grid(mins, maxs, counts, periodic)


def state_of_index(grid: Grid, multi_index) -> np.ndarray:
    """Coordinates of one node: min_k + index_k * spacing_k."""
    idx = tuple(int(i) for i in multi_index)
    if len(idx) != grid.dim_count:
        raise ValueError(f"index has {len(idx)} entries for a {grid.dim_count}-d grid")
    for k, i in enumerate(idx):
        if not 0 <= i < grid.counts[k]:
            raise IndexError(f"index {i} out of range [0, {grid.counts[k]}) in dimension {k}")
    dx = grid.spacings
    return np.array([grid.mins[k] + idx[k] * dx[k] for k in range(grid.dim_count)])


def _diff_pair_arrays(values: np.ndarray, dim: int, inv_dx: float, periodic: bool):
    """Left and right one-sided differences along one axis.

    Non-periodic boundaries use linear-extrapolation ghost nodes
    (v[-1] = 2 v[0] - v[1] and symmetric at the far end), so the left
    difference at node 0 equals the forward difference there.
    """
    v_prev = np.roll(values, 1, axis=dim)
    v_next = np.roll(values, -1, axis=dim)
    if not periodic:
        first = [slice(None)] * values.ndim
        second = [slice(None)] * values.ndim
        last = [slice(None)] * values.ndim
        penult = [slice(None)] * values.ndim
        first[dim], second[dim], last[dim], penult[dim] = 0, 1, -1, -2
        first, second, last, penult = map(tuple, (first, second, last, penult))
        v_prev[first] = 2.0 * values[first] - values[second]
        v_next[last] = 2.0 * values[last] - values[penult]
    left = (values - v_prev) * inv_dx
    right = (v_next - values) * inv_dx
    return left, right


def one_sided_diff(field: ScalarField, dim: int, side: str) -> ScalarField:
    """First-order one-sided difference approximation of the spatial gradient."""
    grid = field.grid
    if not 0 <= dim < grid.dim_count:
        raise ValueError(f"dimension {dim} out of range for {grid.dim_count}-d grid")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    inv_dx = 1.0 / grid.spacings[dim]
    left, right = _diff_pair_arrays(field.values, dim, inv_dx, grid.periodic[dim])
    return ScalarField(grid, left if side == "left" else right)


def cell_volume(grid: Grid) -> float:
    """Volume quantum of one node: the product of the spacings."""
    return float(np.prod(grid.spacings))
