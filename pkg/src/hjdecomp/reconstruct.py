"""Back-projection of subsystem value functions and under-approximation audits.

A piece's two subsystem values extend to the full state space by reading only
their own coordinates; intersecting the two back-projected sub-zero sets is a
pointwise maximum, and the union over pieces is a pointwise minimum:

    V_approx(z) = min over pieces of max(V_x(z|x_dims), V_y(z|y_dims))

The full-dimensional approximation is never materialized unless explicitly
exported; volume counts and comparisons stream over the leading grid axis in
a fixed order, so results are independent of chunking and thread counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid, ScalarField, cell_volume
from .solver import ValueFunction

__all__ = [
    "PieceResult",
    "ReconstructionReport",
    "BackProjection",
    "Reconstruction",
    "backproject",
    "evaluate_reconstruction",
    "sublevel_volume",
    "compare",
    "multilinear_sample",
]


@dataclass
class PieceResult:
    """Solved subsystem pair of one piece, plus its dimension maps.

    ``x_section`` and ``y_section`` record the piece's section product as
    (full-state dimension, (lo, hi)) pairs: the heading interval the
    x-subsystem was confined to and the speed interval for the y-subsystem.
    A piece asserts nothing outside that product, so reconstruction replaces
    its values there with a large sentinel (the in-solve mask already keeps
    them positive; this only matters for value-level audits above zero).
    """

    i: int
    j: int
    x_value: ValueFunction
    y_value: ValueFunction
    x_dims: tuple[int, ...]
    y_dims: tuple[int, ...]
    x_section: tuple[int, tuple[float, float]] | None = None
    y_section: tuple[int, tuple[float, float]] | None = None

    def __post_init__(self):
        if self.x_value.mode != self.y_value.mode:
            raise ValueError("piece subsystems solved with different modes")
        if not math.isclose(self.x_value.horizon, self.y_value.horizon):
            raise ValueError("piece subsystems solved with different horizons")
        for section, dims in ((self.x_section, self.x_dims), (self.y_section, self.y_dims)):
            if section is not None and section[0] not in dims:
                raise ValueError("section dimension must belong to its subsystem's dim map")

    @property
    def solve_seconds(self) -> float:
        return self.x_value.solve_seconds + self.y_value.solve_seconds

    def sections(self):
        for section in (self.x_section, self.y_section):
            if section is not None:
                yield section


@dataclass
class ReconstructionReport:
    """Volumes and pointwise audit of approximation vs full-dimensional truth.

    A node violates when full - approx > tolerance there: the approximation
    would claim strictly more than the truth beyond the discretization budget.
    """

    volume_approx: float
    volume_full: float
    volume_ratio: float
    max_violation: float
    violation_fraction: float
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "volume_approx": self.volume_approx,
            "volume_full": self.volume_full,
            "volume_ratio": self.volume_ratio,
            "max_violation": self.max_violation,
            "violation_fraction": self.violation_fraction,
            "tolerance": self.tolerance,
        }


def multilinear_sample(grid: Grid, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of node values at arbitrary points.

    ``points`` has shape (n, dim).  Periodic dimensions wrap; non-periodic
    queries outside the grid (beyond a relative epsilon) raise.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n, d = pts.shape
    if d != grid.dim_count:
        raise ValueError(f"points have {d} coordinates for a {grid.dim_count}-d grid")
    i_lo = np.empty((n, d), dtype=np.int64)
    i_hi = np.empty((n, d), dtype=np.int64)
    frac = np.empty((n, d), dtype=np.float64)
    for k in range(d):
        nk = grid.counts[k]
        u = (pts[:, k] - grid.mins[k]) / grid.spacings[k]
        if grid.periodic[k]:
            u = np.mod(u, nk)
            base = np.floor(u)
            frac[:, k] = u - base
            i_lo[:, k] = base.astype(np.int64) % nk
            i_hi[:, k] = (i_lo[:, k] + 1) % nk
        else:
            eps = 1e-9 * max(nk - 1, 1)
            if np.any(u < -eps) or np.any(u > nk - 1 + eps):
                bad = pts[np.argmax((u < -eps) | (u > nk - 1 + eps)), k]
                raise ValueError(
                    f"projected coordinate {bad} outside subsystem grid range "
                    f"[{grid.mins[k]}, {grid.maxs[k]}] in dimension {k}"
                )
            u = np.clip(u, 0.0, nk - 1)
            base = np.minimum(np.floor(u), nk - 2)
            frac[:, k] = u - base
            i_lo[:, k] = base.astype(np.int64)
            i_hi[:, k] = i_lo[:, k] + 1
    acc = np.zeros(n, dtype=np.float64)
    for corner in range(1 << d):
        w = np.ones(n, dtype=np.float64)
        idx = []
        for k in range(d):
            if (corner >> k) & 1:
                idx.append(i_hi[:, k])
                w = w * frac[:, k]
            else:
                idx.append(i_lo[:, k])
                w = w * (1.0 - frac[:, k])
        acc += w * values[tuple(idx)]
    return acc


class BackProjection:
    """Extension of a subsystem value function to full-space coordinates.

    Reads only the mapped coordinates; off-node queries use multilinear
    interpolation on the subsystem grid.
    """

    def __init__(self, sub_value: ValueFunction, dim_map: tuple[int, ...]):
        if len(dim_map) != sub_value.grid.dim_count:
            raise ValueError("dim_map must have one entry per subsystem dimension")
        if len(set(dim_map)) != len(dim_map):
            raise ValueError("dim_map must be injective")
        self.sub_value = sub_value
        self.dim_map = tuple(int(k) for k in dim_map)

    def __call__(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        sub_pts = pts[:, list(self.dim_map)]
        return multilinear_sample(self.sub_value.grid, self.sub_value.values, sub_pts)

    def at(self, z) -> float:
        return float(self(np.asarray(z, dtype=np.float64).reshape(1, -1))[0])


def backproject(sub_value: ValueFunction, full_grid: Grid, dim_map) -> BackProjection:
    """Back-project onto a full grid, checking the subsystem covers its ranges."""
    dim_map = tuple(int(k) for k in dim_map)
    for k_sub, k_full in enumerate(dim_map):
        if not 0 <= k_full < full_grid.dim_count:
            raise ValueError(f"dim_map entry {k_full} out of range for the full grid")
        sub = sub_value.grid
        if sub.periodic[k_sub]:
            continue
        if sub.mins[k_sub] > full_grid.mins[k_full] or sub.maxs[k_sub] < full_grid.maxs[k_full]:
            raise ValueError(
                f"subsystem range [{sub.mins[k_sub]}, {sub.maxs[k_sub]}] does not cover "
                f"full-grid range [{full_grid.mins[k_full]}, {full_grid.maxs[k_full]}] "
                f"in dimension {k_full}"
            )
    return BackProjection(sub_value, dim_map)


def _axes_match(sub: Grid, k_sub: int, full: Grid, k_full: int) -> bool:
    return (
        sub.mins[k_sub] == full.mins[k_full]
        and sub.maxs[k_sub] == full.maxs[k_full]
        and sub.counts[k_sub] == full.counts[k_full]
        and sub.periodic[k_sub] == full.periodic[k_full]
    )


def _resample_to_axes(sub_vf: ValueFunction, full_grid: Grid, dim_map: tuple[int, ...]) -> np.ndarray:
    """Subsystem values on the full grid's projected axes (identity when matched)."""
    if all(_axes_match(sub_vf.grid, ks, full_grid, kf) for ks, kf in enumerate(dim_map)):
        return sub_vf.values
    axes = [full_grid.axis(kf) for kf in dim_map]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    out = multilinear_sample(sub_vf.grid, sub_vf.values, pts)
    return out.reshape([full_grid.counts[kf] for kf in dim_map])


def _positioned(values: np.ndarray, dims: tuple[int, ...], full_shape: tuple[int, ...]):
    """Broadcast a subsystem array into full shape along its mapped axes."""
    shape = [1] * len(full_shape)
    for ax, k_full in enumerate(dims):
        shape[k_full] = values.shape[ax]
    return np.broadcast_to(values.reshape(shape), full_shape)


class Reconstruction:
    """Lazy full-dimensional evaluator over a family of solved pieces.

    Outside a piece's own section product the piece asserts nothing, so its
    contribution there is a finite sentinel above every value it could be
    compared against (with freezing, the full solve never exceeds the target
    samples, which the subsystem fields share).  Sub-zero sets are unaffected
    because in-solve masking already keeps those values positive.
    """

    _SECTION_EPS = 1e-9

    def __init__(self, pieces):
        pieces = list(pieces)
        if not pieces:
            raise ValueError("reconstruction needs at least one piece")
        first = pieces[0]
        for p in pieces:
            if p.x_dims != first.x_dims or p.y_dims != first.y_dims:
                raise ValueError("pieces disagree on dimension maps")
        self.pieces = pieces
        self.x_dims = first.x_dims
        self.y_dims = first.y_dims
        self.sentinel = 1.0 + max(
            max(float(p.x_value.values.max()), float(p.y_value.values.max()))
            for p in pieces
        )
        self._cache_grid: Grid | None = None
        self._cache: list[tuple[np.ndarray, np.ndarray]] | None = None

    def _section_ok(self, piece: PieceResult, pts: np.ndarray) -> np.ndarray:
        ok = np.ones(pts.shape[0], dtype=bool)
        for dim, (lo, hi) in piece.sections():
            eps = self._SECTION_EPS * max(1.0, abs(lo), abs(hi))
            ok &= (pts[:, dim] >= lo - eps) & (pts[:, dim] <= hi + eps)
        return ok

    def value_at(self, z) -> float:
        return float(self.values_at(np.asarray(z, dtype=np.float64).reshape(1, -1))[0])

    def values_at(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        best = None
        for p in self.pieces:
            vx = BackProjection(p.x_value, self.x_dims)(pts)
            vy = BackProjection(p.y_value, self.y_dims)(pts)
            combined = np.where(self._section_ok(p, pts), np.maximum(vx, vy), self.sentinel)
            best = combined if best is None else np.minimum(best, combined)
        return best

    def _resampled(self, full_grid: Grid):
        if self._cache_grid is not None and self._cache_grid.same_discretization(full_grid):
            return self._cache
        cache = []
        for p in self.pieces:
            vx = _resample_to_axes(p.x_value, full_grid, self.x_dims)
            vy = _resample_to_axes(p.y_value, full_grid, self.y_dims)
            cache.append((vx, vy))
        self._cache_grid = full_grid
        self._cache = cache
        return cache

    def _section_views(self, full_grid: Grid):
        views = []
        for p in self.pieces:
            inside = None
            for dim, (lo, hi) in p.sections():
                eps = self._SECTION_EPS * max(1.0, abs(lo), abs(hi))
                axis = full_grid.axis(dim)
                ok = (axis >= lo - eps) & (axis <= hi + eps)
                shape = [1] * full_grid.dim_count
                shape[dim] = len(axis)
                ok = np.broadcast_to(ok.reshape(shape), full_grid.shape)
                inside = ok if inside is None else inside & ok
            views.append(inside)
        return views

    def iter_slabs(self, full_grid: Grid):
        """Yield reconstruction values one leading-axis slab at a time."""
        cache = self._resampled(full_grid)
        sections = self._section_views(full_grid)
        views = [
            (
                _positioned(vx, self.x_dims, full_grid.shape),
                _positioned(vy, self.y_dims, full_grid.shape),
                inside,
            )
            for (vx, vy), inside in zip(cache, sections)
        ]
        for i0 in range(full_grid.counts[0]):
            slab = None
            for ax, ay, inside in views:
                combined = np.maximum(ax[i0], ay[i0])
                if inside is not None:
                    combined = np.where(inside[i0], combined, self.sentinel)
                slab = combined if slab is None else np.minimum(slab, combined)
            yield slab

    def materialize(self, full_grid: Grid) -> ScalarField:
        out = np.empty(full_grid.shape, dtype=np.float64)
        for i0, slab in enumerate(self.iter_slabs(full_grid)):
            out[i0] = slab
        return ScalarField(full_grid, out)


def evaluate_reconstruction(pieces, z) -> float:
    """min over pieces of max(back-projected V_x, back-projected V_y) at one state."""
    return Reconstruction(pieces).value_at(z)


def _iter_callable_slabs(fn, grid: Grid):
    rest_axes = [grid.axis(k) for k in range(1, grid.dim_count)]
    if rest_axes:
        mesh = np.meshgrid(*rest_axes, indexing="ij")
        rest = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        rest = np.zeros((1, 0))
    rest_shape = tuple(grid.counts[1:])
    for x0 in grid.axis(0):
        pts = np.concatenate([np.full((rest.shape[0], 1), x0), rest], axis=1)
        yield np.asarray(fn(pts), dtype=np.float64).reshape(rest_shape)


def _slab_iterator(obj, grid: Grid):
    if isinstance(obj, Reconstruction):
        return obj.iter_slabs(grid)
    if isinstance(obj, ValueFunction):
        obj = obj.field
    if isinstance(obj, ScalarField):
        if not obj.grid.same_discretization(grid):
            raise ValueError("field is sampled on a different grid")
        return (obj.values[i0] for i0 in range(grid.counts[0]))
    if callable(obj):
        return _iter_callable_slabs(obj, grid)
    raise TypeError(f"cannot evaluate {type(obj).__name__} on a grid")


def sublevel_volume(values, grid: Grid) -> float:
    """(number of nodes with value <= 0) times the cell volume."""
    count = 0
    for slab in _slab_iterator(values, grid):
        count += int(np.count_nonzero(slab <= 0.0))
    return count * cell_volume(grid)


def compare(approx, full: ValueFunction, tol: float) -> ReconstructionReport:
    """Audit an approximation against a full-dimensional solve on its grid."""
    if tol < 0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    grid = full.grid
    quantum = cell_volume(grid)
    count_a = 0
    count_f = 0
    violations = 0
    max_violation = 0.0
    for i0, slab in enumerate(_slab_iterator(approx, grid)):
        fslab = full.values[i0]
        count_a += int(np.count_nonzero(slab <= 0.0))
        count_f += int(np.count_nonzero(fslab <= 0.0))
        gap = fslab - slab
        violations += int(np.count_nonzero(gap > tol))
        worst = float(gap.max()) if gap.size else 0.0
        if worst > max_violation:
            max_violation = worst
    total = grid.total_nodes
    volume_approx = count_a * quantum
    volume_full = count_f * quantum
    ratio = volume_approx / volume_full if volume_full > 0 else math.nan
    return ReconstructionReport(
        volume_approx=volume_approx,
        volume_full=volume_full,
        volume_ratio=ratio,
        max_violation=max_violation,
        violation_fraction=violations / total,
        tolerance=tol,
    )
